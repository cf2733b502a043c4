#include "brw/exact_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "brw/error.hpp"
#include "brw/numeric.hpp"

namespace brw {

namespace {

const FiniteLaw& finite_or_throw(const OffspringLaw& law) {
  const FiniteLaw* f = law.finite();
  if (f == nullptr) {
    throw Error(ErrorCode::invalid_argument, "exact enumeration requires a finite law");
  }
  return *f;
}

void preflight(const OffspringLaw& law, int depth, bool rays) {
  if (depth < 0) throw Error(ErrorCode::invalid_argument, "depth must be >= 0");
  const double est = log10_outcome_estimate(law, depth, rays);
  if (est > std::log10(kMaxOutcomes)) {
    std::ostringstream msg;
    msg << "enumeration to depth " << depth << " projects ~1e" << est
        << " outcomes (cap 1e7)";
    throw TooLargeError(msg.str(), est);
  }
}

struct MenuItem {
  std::uint32_t atom;
  double probability;
};

// Depth-first enumeration over generations. For each generation every node
// picks an atom from its menu (mixed-radix counter); when a spine is tracked
// the spine node uses its own menu and then picks the next spine child.
class Enumerator {
 public:
  Enumerator(const FiniteLaw& law, int depth, double alpha,
             std::optional<std::vector<double>> spine_weights)
      : law_(law), depth_(depth), alpha_(alpha) {
    for (std::uint32_t j = 0; j < law.atoms.size(); ++j) {
      ordinary_.push_back({j, law.atoms[j].probability});
    }
    if (spine_weights) {
      tracking_spine_ = true;
      for (std::uint32_t j = 0; j < law.atoms.size(); ++j) {
        if ((*spine_weights)[j] > 0.0) spine_menu_.push_back({j, (*spine_weights)[j]});
      }
    }
  }

  void run(const std::function<void(const SpinedOutcome&)>& visit) {
    visit_ = &visit;
    SpinedOutcome start;
    start.tree.positions.push_back({0.0});
    start.tree.prefix_length.push_back(0);
    start.ray.push_back(0);
    start.probability = 1.0;
    recurse(std::move(start), 0);
  }

 private:
  void recurse(SpinedOutcome state, int g) {
    if (g == depth_) {
      state.tree.probability = tracking_spine_ ? 0.0 : state.probability;
      (*visit_)(state);
      return;
    }
    const std::vector<double> gen = state.tree.positions[static_cast<std::size_t>(g)];
    const std::size_t z = gen.size();
    const std::size_t spine_index =
        tracking_spine_ ? state.ray[static_cast<std::size_t>(g)] : z;
    std::vector<std::size_t> digit(z, 0);

    auto menu_of = [&](std::size_t i) -> const std::vector<MenuItem>& {
      return i == spine_index ? spine_menu_ : ordinary_;
    };

    while (true) {
      SpinedOutcome next = state;
      double prob = state.probability;
      std::vector<double> children;
      std::size_t spine_first = 0;
      std::uint32_t spine_atom = 0;
      for (std::size_t i = 0; i < z; ++i) {
        const MenuItem& item = menu_of(i)[digit[i]];
        prob *= item.probability;
        next.tree.atoms.push_back(item.atom);
        if (i == spine_index) {
          spine_first = children.size();
          spine_atom = item.atom;
        }
        for (double x : law_.atoms[item.atom].displacements) children.push_back(gen[i] + x);
      }
      next.tree.positions.push_back(children);
      next.tree.prefix_length.push_back(next.tree.atoms.size());

      if (!tracking_spine_) {
        next.probability = prob;
        recurse(std::move(next), g + 1);
      } else {
        const auto& litter = law_.atoms[spine_atom].displacements;
        double tilt = 0.0;
        for (double x : litter) tilt += std::exp(-alpha_ * x);
        for (std::size_t j = 0; j < litter.size(); ++j) {
          SpinedOutcome branch = next;
          branch.ray.push_back(spine_first + j);
          branch.steps.push_back(litter[j]);
          branch.probability = prob * std::exp(-alpha_ * litter[j]) / tilt;
          recurse(std::move(branch), g + 1);
        }
      }

      // Advance the mixed-radix counter.
      std::size_t i = 0;
      for (; i < z; ++i) {
        if (++digit[i] < menu_of(i).size()) break;
        digit[i] = 0;
      }
      if (i == z) break;
    }
  }

  const FiniteLaw& law_;
  int depth_;
  double alpha_;
  bool tracking_spine_ = false;
  std::vector<MenuItem> ordinary_;
  std::vector<MenuItem> spine_menu_;
  const std::function<void(const SpinedOutcome&)>* visit_ = nullptr;
};

double discrepancy(double a, double b) {
  if (a == b) return 0.0;
  return std::fabs(a - b) / std::max(1.0, std::fabs(b));
}

using Key = std::vector<std::uint32_t>;

Key prefix_key(const OutcomeTree& t, int n) {
  const auto len = static_cast<std::ptrdiff_t>(t.prefix_length[static_cast<std::size_t>(n)]);
  return Key(t.atoms.begin(), t.atoms.begin() + len);
}

std::vector<OutcomeTree> collect_mu(const OffspringLaw& law, int depth) {
  std::vector<OutcomeTree> out;
  enumerate_mu(law, depth, [&](const OutcomeTree& t) { out.push_back(t); });
  return out;
}

// mu-hat* mass keyed by tree, one slot per generation-`depth` vertex.
struct HatStarTable {
  std::map<Key, std::vector<double>> mass;
  std::size_t outcomes = 0;
};

HatStarTable collect_hat_star(const OffspringLaw& law, double alpha, int depth) {
  HatStarTable table;
  enumerate_mu_hat_star(law, alpha, depth, [&](const SpinedOutcome& o) {
    auto& slots = table.mass[o.tree.atoms];
    slots.resize(o.tree.positions.back().size(), 0.0);
    slots[o.ray.back()] += o.probability;
    ++table.outcomes;
  });
  return table;
}

CheckResult make_result(const std::string& name, const std::string& law_id, double alpha,
                        int depth) {
  CheckResult r;
  r.check = name;
  r.law = law_id;
  r.alpha = alpha;
  r.depth = depth;
  return r;
}

}  // namespace

double log10_outcome_estimate(const OffspringLaw& law, int depth, bool rays) {
  const FiniteLaw& f = finite_or_throw(law);
  const double atoms = static_cast<double>(f.atoms.size());
  const double maxc = static_cast<double>(law.max_offspring());
  double est = 0.0;
  double population = 1.0;
  for (int g = 0; g < depth; ++g) {
    est += population * std::log10(atoms);
    population *= maxc;
    if (!std::isfinite(est) || est > 1e6) return kPosInf;
  }
  if (rays && maxc > 1.0) est += depth * std::log10(maxc);
  return est;
}

void enumerate_mu(const OffspringLaw& law, int depth,
                  const std::function<void(const OutcomeTree&)>& visit) {
  const FiniteLaw& f = finite_or_throw(law);
  preflight(law, depth, false);
  Enumerator e(f, depth, 0.0, std::nullopt);
  e.run([&](const SpinedOutcome& o) {
    OutcomeTree t = o.tree;
    t.probability = o.probability;
    visit(t);
  });
}

void enumerate_mu_hat_star(const OffspringLaw& law, double alpha, int depth,
                           const std::function<void(const SpinedOutcome&)>& visit) {
  const FiniteLaw& f = finite_or_throw(law);
  preflight(law, depth, true);
  Enumerator e(f, depth, alpha, size_biased_weights(law, alpha));
  e.run(visit);
}

double w_value(const OutcomeTree& t, int n, double alpha, double m) {
  double sum = 0.0;
  for (double s : t.positions[static_cast<std::size_t>(n)]) sum += std::exp(-alpha * s);
  return sum / std::pow(m, n);
}

CheckResult check_goal(const OffspringLaw& law, double alpha, int depth,
                       const std::string& law_id) {
  CheckResult r = make_result("goal", law_id, alpha, depth);
  const double m = tilted_mass(law, alpha);
  const auto mu = collect_mu(law, depth);
  auto hat = collect_hat_star(law, alpha, depth);
  for (const OutcomeTree& t : mu) {
    const auto& last = t.positions.back();
    auto it = hat.mass.find(t.atoms);
    for (std::size_t i = 0; i < last.size(); ++i) {
      const double lhs = it == hat.mass.end() ? 0.0 : it->second[i];
      const double rhs = t.probability * std::exp(-alpha * last[i]) / std::pow(m, depth);
      r.max_discrepancy = std::max(r.max_discrepancy, discrepancy(lhs, rhs));
      ++r.outcomes;
    }
    if (it != hat.mass.end()) hat.mass.erase(it);
  }
  // Any mass on a tree mu never produces.
  for (const auto& [key, slots] : hat.mass) {
    for (double v : slots) r.max_discrepancy = std::max(r.max_discrepancy, std::fabs(v));
  }
  r.pass = r.max_discrepancy <= kIdentityTolerance;
  return r;
}

CheckResult check_rn(const OffspringLaw& law, double alpha, int depth,
                     const std::string& law_id) {
  CheckResult r = make_result("rn", law_id, alpha, depth);
  const double m = tilted_mass(law, alpha);
  const auto mu = collect_mu(law, depth);
  auto hat = collect_hat_star(law, alpha, depth);
  for (const OutcomeTree& t : mu) {
    double lhs = 0.0;
    if (auto it = hat.mass.find(t.atoms); it != hat.mass.end()) {
      lhs = stable_sum(it->second);
      hat.mass.erase(it);
    }
    const double rhs = t.probability * w_value(t, depth, alpha, m);
    r.max_discrepancy = std::max(r.max_discrepancy, discrepancy(lhs, rhs));
    ++r.outcomes;
  }
  for (const auto& [key, slots] : hat.mass) {
    r.max_discrepancy = std::max(r.max_discrepancy, stable_sum(slots));
  }
  r.pass = r.max_discrepancy <= kIdentityTolerance;
  return r;
}

CheckResult check_mean_w(const OffspringLaw& law, double alpha, int depth,
                         const std::string& law_id) {
  CheckResult r = make_result("mean_w", law_id, alpha, depth);
  const double m = tilted_mass(law, alpha);
  const auto mu = collect_mu(law, depth);
  r.outcomes = mu.size();
  for (int n = 0; n <= depth; ++n) {
    std::vector<double> terms;
    terms.reserve(mu.size());
    for (const OutcomeTree& t : mu) terms.push_back(t.probability * w_value(t, n, alpha, m));
    r.max_discrepancy = std::max(r.max_discrepancy, discrepancy(stable_sum(terms), 1.0));
  }
  r.pass = r.max_discrepancy <= kMassTolerance;
  return r;
}

CheckResult check_martingale(const OffspringLaw& law, double alpha, int depth,
                             const std::string& law_id) {
  CheckResult r = make_result("martingale", law_id, alpha, depth);
  const double m = tilted_mass(law, alpha);
  const auto mu = collect_mu(law, depth);
  for (int n = 0; n < depth; ++n) {
    struct Group {
      std::vector<double> weighted;
      std::vector<double> mass;
      double w_n = 0.0;
    };
    std::map<Key, Group> groups;
    for (const OutcomeTree& t : mu) {
      Group& grp = groups[prefix_key(t, n)];
      grp.weighted.push_back(t.probability * w_value(t, n + 1, alpha, m));
      grp.mass.push_back(t.probability);
      grp.w_n = w_value(t, n, alpha, m);
    }
    for (auto& [key, grp] : groups) {
      const double cond = stable_sum(grp.weighted) / stable_sum(grp.mass);
      r.max_discrepancy = std::max(r.max_discrepancy, discrepancy(cond, grp.w_n));
      ++r.outcomes;
    }
  }
  r.pass = r.max_discrepancy <= kIdentityTolerance;
  return r;
}

namespace {

// Conditional expectations of 1/W_{n+1} under the ray-marginalized mu-hat.
// With survival == true the target is P_mu[Z_{n+1} > 0 | F_n] / W_n.
CheckResult inverse_martingale_impl(const OffspringLaw& law, double alpha, int depth,
                                    const std::string& law_id, bool survival) {
  CheckResult r = make_result(survival ? "inverse_martingale_survival" : "inverse_martingale",
                              law_id, alpha, depth);
  const double m = tilted_mass(law, alpha);
  const auto mu = collect_mu(law, depth);
  const auto hat = collect_hat_star(law, alpha, depth);
  for (int n = 0; n < depth; ++n) {
    struct Group {
      std::vector<double> hat_over_w;
      std::vector<double> hat_mass;
      std::vector<double> mu_mass;
      std::vector<double> mu_survive;
      double w_n = 0.0;
      bool infinite = false;
    };
    std::map<Key, Group> groups;
    for (const OutcomeTree& t : mu) {
      Group& grp = groups[prefix_key(t, n)];
      const double w_next = w_value(t, n + 1, alpha, m);
      grp.w_n = w_value(t, n, alpha, m);
      grp.mu_mass.push_back(t.probability);
      if (w_next > 0.0) grp.mu_survive.push_back(t.probability);
      double mass = 0.0;
      if (auto it = hat.mass.find(t.atoms); it != hat.mass.end()) mass = stable_sum(it->second);
      if (mass > 0.0) {
        if (w_next == 0.0) {
          grp.infinite = true;
        } else {
          grp.hat_over_w.push_back(mass / w_next);
        }
      }
      grp.hat_mass.push_back(mass);
    }
    for (auto& [key, grp] : groups) {
      const double hat_mass = stable_sum(grp.hat_mass);
      if (!(hat_mass > 0.0)) continue;
      ++r.outcomes;
      if (grp.infinite || grp.w_n == 0.0) {
        r.max_discrepancy = kPosInf;
        continue;
      }
      const double cond = stable_sum(grp.hat_over_w) / hat_mass;
      double target = 1.0 / grp.w_n;
      if (survival) target *= stable_sum(grp.mu_survive) / stable_sum(grp.mu_mass);
      r.max_discrepancy = std::max(r.max_discrepancy, discrepancy(cond, target));
    }
  }
  r.pass = r.max_discrepancy <= kIdentityTolerance;
  return r;
}

}  // namespace

CheckResult check_inverse_martingale(const OffspringLaw& law, double alpha, int depth,
                                     const std::string& law_id) {
  return inverse_martingale_impl(law, alpha, depth, law_id, false);
}

CheckResult check_inverse_martingale_survival(const OffspringLaw& law, double alpha,
                                              int depth, const std::string& law_id) {
  return inverse_martingale_impl(law, alpha, depth, law_id, true);
}

CheckResult check_spine_mean(const OffspringLaw& law, double alpha, int depth,
                             const std::string& law_id) {
  CheckResult r = make_result("spine_mean", law_id, alpha, depth);
  const TiltProfile profile = classify(law, alpha);
  const auto step_law = spine_step_law(law, alpha);

  std::vector<std::vector<double>> mean_terms(static_cast<std::size_t>(depth));
  std::vector<std::map<double, std::vector<double>>> marginals(static_cast<std::size_t>(depth));
  enumerate_mu_hat_star(law, alpha, depth, [&](const SpinedOutcome& o) {
    ++r.outcomes;
    for (std::size_t k = 0; k < o.steps.size(); ++k) {
      mean_terms[k].push_back(o.probability * o.steps[k]);
      marginals[k][o.steps[k] + 0.0].push_back(o.probability);
    }
  });
  for (int k = 0; k < depth; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const double mean = stable_sum(mean_terms[kk]);
    r.max_discrepancy = std::max(r.max_discrepancy, discrepancy(mean, profile.drift));
    std::map<double, double> exact;
    for (const auto& sp : step_law) exact[sp.displacement] = sp.probability;
    for (auto& [x, terms] : marginals[kk]) {
      const double p = stable_sum(terms);
      const double q = exact.contains(x) ? exact[x] : 0.0;
      r.max_discrepancy = std::max(r.max_discrepancy, std::fabs(p - q));
      exact.erase(x);
    }
    for (const auto& [x, q] : exact) r.max_discrepancy = std::max(r.max_discrepancy, q);
  }
  r.pass = r.max_discrepancy <= kIdentityTolerance;
  return r;
}

EnumerationReport run_all_checks(const OffspringLaw& law, double alpha, int depth,
                                 const std::string& law_id) {
  return {
      check_goal(law, alpha, depth, law_id),
      check_rn(law, alpha, depth, law_id),
      check_mean_w(law, alpha, depth, law_id),
      check_martingale(law, alpha, depth, law_id),
      check_inverse_martingale(law, alpha, depth, law_id),
      check_spine_mean(law, alpha, depth, law_id),
      check_inverse_martingale_survival(law, alpha, depth, law_id),
  };
}

double exact_expectation(const OffspringLaw& law, int depth,
                         const std::function<double(const OutcomeTree&)>& f) {
  std::vector<double> terms;
  enumerate_mu(law, depth, [&](const OutcomeTree& t) { terms.push_back(t.probability * f(t)); });
  return stable_sum(std::move(terms));
}

}  // namespace brw
