#include "oracle.hpp"

#include <cmath>

namespace oracle {

Law from(const brw::FiniteLaw& law) {
  Law out;
  for (const auto& a : law.atoms) out.push_back({a.probability, a.displacements});
  return out;
}

brw::FiniteLaw to_finite(const Law& law) {
  brw::FiniteLaw out;
  for (const auto& l : law) out.atoms.push_back({l.p, l.x});
  return out;
}

brw::FiniteLaw binary() { return to_finite({{1.0, {0.0, 0.0}}}); }
brw::FiniteLaw law_c() { return to_finite({{0.2, {}}, {0.8, {0.0, 1.0}}}); }
brw::FiniteLaw law_d() { return to_finite({{0.5, {0.0, 1.0, 1.0, 1.0}}, {0.5, {1.0, 1.0}}}); }
brw::FiniteLaw critical() { return to_finite({{0.5, {}}, {0.5, {0.0, 0.0}}}); }

brw::FiniteLaw shifted(const brw::FiniteLaw& law, double c) {
  brw::FiniteLaw out = law;
  for (auto& a : out.atoms) {
    for (auto& x : a.displacements) x += c;
  }
  return out;
}

long double mass(const Law& law, double alpha) {
  long double m = 0;
  for (const auto& l : law) {
    for (double x : l.x) m += l.p * std::exp(-static_cast<long double>(alpha) * x);
  }
  return m;
}

long double mass_derivative(const Law& law, double alpha) {
  long double d = 0;
  for (const auto& l : law) {
    for (double x : l.x) d -= l.p * x * std::exp(-static_cast<long double>(alpha) * x);
  }
  return d;
}

long double llogl(const Law& law, double alpha) {
  long double s = 0;
  for (const auto& l : law) {
    long double inner = 0;
    for (double x : l.x) inner += std::exp(-static_cast<long double>(alpha) * x);
    if (inner > 1) s += l.p * inner * std::log(inner);
  }
  return s;
}

double pgf(const Law& law, double s) {
  long double f = 0;
  for (const auto& l : law) f += l.p * std::pow(static_cast<long double>(s), l.x.size());
  return static_cast<double>(f);
}

double pgf_iterate(const Law& law, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s = pgf(law, s);
  return s;
}

double quadratic_extinction(double p0, double p2) {
  // p2 s^2 - s + p0 = 0
  return (1.0 - std::sqrt(1.0 - 4.0 * p0 * p2)) / (2.0 * p2);
}

namespace {

void expand(const Law& law, const std::vector<double>& parents, std::size_t i, double prob,
            std::vector<double>& children, std::vector<std::pair<double, std::vector<double>>>& out) {
  if (i == parents.size()) {
    out.emplace_back(prob, children);
    return;
  }
  for (const auto& l : law) {
    const std::size_t mark = children.size();
    for (double x : l.x) children.push_back(parents[i] + x);
    expand(law, parents, i + 1, prob * l.p, children, out);
    children.resize(mark);
  }
}

}  // namespace

std::vector<Outcome> enumerate(const Law& law, int depth) {
  std::vector<Outcome> current{Outcome{1.0, {{0.0}}}};
  for (int g = 0; g < depth; ++g) {
    std::vector<Outcome> next;
    for (const auto& o : current) {
      std::vector<std::pair<double, std::vector<double>>> gens;
      std::vector<double> scratch;
      expand(law, o.positions.back(), 0, 1.0, scratch, gens);
      for (auto& [p, pos] : gens) {
        Outcome child = o;
        child.probability *= p;
        child.positions.push_back(std::move(pos));
        next.push_back(std::move(child));
      }
    }
    current = std::move(next);
  }
  return current;
}

double expectation(const Law& law, int depth, const std::function<double(const Outcome&)>& f) {
  long double s = 0;
  for (const auto& o : enumerate(law, depth)) s += o.probability * f(o);
  return static_cast<double>(s);
}

long double w_direct(const Outcome& t, int n, double alpha, long double m) {
  long double s = 0;
  for (double x : t.positions.at(static_cast<std::size_t>(n))) {
    s += std::exp(-static_cast<long double>(alpha) * x);
  }
  return s / std::pow(m, n);
}

brw::FiniteLaw random_law(std::mt19937_64& g, int max_atoms, int max_count) {
  std::uniform_int_distribution<int> n_atoms(1, max_atoms);
  std::uniform_int_distribution<int> count(0, max_count);
  std::uniform_real_distribution<double> disp(-2.0, 2.0);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  Law law;
  bool nonempty = false;
  const int k = n_atoms(g);
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    Litter l;
    l.p = weight(g);
    total += l.p;
    const int c = (i == k - 1 && !nonempty) ? std::max(1, count(g)) : count(g);
    for (int j = 0; j < c; ++j) l.x.push_back(disp(g));
    nonempty |= c > 0;
    law.push_back(std::move(l));
  }
  for (auto& l : law) l.p /= total;
  return to_finite(law);
}

}  // namespace oracle
