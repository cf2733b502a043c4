#include "brw/offspring_model.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <map>
#include <sstream>

#include "brw/error.hpp"
#include "brw/numeric.hpp"

namespace brw {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::normalization: return "NORMALIZATION";
    case ErrorCode::empty_law: return "EMPTY_LAW";
    case ErrorCode::subcritical_family: return "SUBCRITICAL_FAMILY";
    case ErrorCode::invalid_law: return "INVALID_LAW";
    case ErrorCode::domain: return "DOMAIN";
    case ErrorCode::no_convergence: return "NO_CONVERGENCE";
    case ErrorCode::overflow: return "OVERFLOW";
    case ErrorCode::zero_mass: return "ZERO_MASS";
    case ErrorCode::population_cap: return "POPULATION_CAP";
    case ErrorCode::level_out_of_range: return "LEVEL_OUT_OF_RANGE";
    case ErrorCode::too_large: return "TOO_LARGE";
    case ErrorCode::not_supercritical: return "NOT_SUPERCRITICAL";
    case ErrorCode::too_many_discards: return "TOO_MANY_DISCARDS";
    case ErrorCode::invalid_argument: return "INVALID_ARGUMENT";
    case ErrorCode::parse: return "PARSE";
    case ErrorCode::io: return "IO";
  }
  return "UNKNOWN";
}

namespace {

constexpr double kNormalizationTolerance = 1e-12;
constexpr double kSeriesTolerance = 1e-9;
constexpr std::int64_t kMaxSeriesTerms = std::int64_t{1} << 26;

const FiniteLaw& require_finite(const OffspringLaw& law, const char* op) {
  const FiniteLaw* f = law.finite();
  if (f == nullptr) {
    throw Error(ErrorCode::invalid_argument,
                std::string(op) + " requires a finite law");
  }
  return *f;
}

// <alpha, l> for one atom, summed smallest first.
double atom_tilt(const Atom& atom, double alpha) {
  std::vector<double> terms;
  terms.reserve(atom.count());
  for (double x : atom.displacements) terms.push_back(std::exp(-alpha * x));
  return stable_sum(std::move(terms));
}

// ---- log-divergent family series -----------------------------------------

// Closed-form antiderivative tails:
//   int_N^inf dx / (x (log x)^b) = (log N)^(1-b) / (b - 1),  b > 1.
double log_power_tail(double x, double b) {
  return std::pow(std::log(x), 1.0 - b) / (b - 1.0);
}

struct SeriesPlan {
  std::int64_t terms;
};

// Smallest N (searched geometrically then by bisection) for which the
// worst-case error bounds fall under kSeriesTolerance, using closed-form
// upper bounds on the sums themselves.
std::int64_t plan_series_terms(double a) {
  const double l2 = std::log(2.0);
  const double s0_low = 1.0 / (4.0 * std::pow(l2, a));
  const double s1_high = 1.0 / (2.0 * std::pow(l2, a)) + log_power_tail(2.0, a);
  const bool finite_llogl = a > 2.0;
  const double s2_high =
      finite_llogl ? 1.0 / (2.0 * std::pow(l2, a - 1.0)) + log_power_tail(2.0, a - 1.0)
                   : 0.0;
  auto predicted = [&](double n) {
    const double ln = std::log(n);
    const double u0 = 1.0 / (n * std::pow(ln, a));  // tail bracket widths
    const double u2 = u0 * ln;
    const double e0 = u0 / 2.0;
    const double mean_err = (u0 / 2.0) / s0_low + s1_high * e0 / (s0_low * s0_low);
    double err = mean_err;
    if (finite_llogl) {
      err = std::max(err, (u2 / 2.0) / s0_low + s2_high * e0 / (s0_low * s0_low));
    }
    return err;
  };
  std::int64_t lo = 16;
  if (predicted(static_cast<double>(lo)) <= kSeriesTolerance) return lo;
  std::int64_t hi = lo;
  while (hi < kMaxSeriesTerms && predicted(static_cast<double>(hi)) > kSeriesTolerance) {
    lo = hi;
    hi *= 2;
  }
  if (hi >= kMaxSeriesTerms) return kMaxSeriesTerms;
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (predicted(static_cast<double>(mid)) <= kSeriesTolerance) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

LogDivergentSeries sum_log_divergent(const LogDivergentLaw& law) {
  const double a = law.tail_exponent;
  const std::int64_t n_terms = plan_series_terms(a);
  const bool finite_llogl = a > 2.0;

  // Terms decrease in n, so summing from the top is smallest-first.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::int64_t n = n_terms; n >= 2; --n) {
    const double dn = static_cast<double>(n);
    const double ln = std::log(dn);
    const double la = std::pow(ln, a);
    s0 += 1.0 / (dn * dn * la);
    s1 += 1.0 / (dn * la);
    if (finite_llogl) s2 += ln / (dn * la);
  }
  const double big_n = static_cast<double>(n_terms);
  const double u0 = 1.0 / (big_n * std::pow(std::log(big_n), a));
  s0 += u0 / 2.0;
  const double e0 = u0 / 2.0;

  const double t1_hi = log_power_tail(big_n, a);
  const double t1_lo = log_power_tail(big_n + 1.0, a);
  s1 += (t1_hi + t1_lo) / 2.0;
  const double e1 = (t1_hi - t1_lo) / 2.0;

  LogDivergentSeries out;
  out.terms = n_terms;
  out.normalizer = 1.0 / s0;
  out.mean = s1 / s0;
  out.mean_error = e1 / s0 + s1 * e0 / (s0 * s0);
  if (finite_llogl) {
    const double t2_hi = log_power_tail(big_n, a - 1.0);
    const double t2_lo = log_power_tail(big_n + 1.0, a - 1.0);
    s2 += (t2_hi + t2_lo) / 2.0;
    const double e2 = (t2_hi - t2_lo) / 2.0;
    out.llogl = s2 / s0;
    out.llogl_error = e2 / s0 + s2 * e0 / (s0 * s0);
  } else {
    out.llogl = kPosInf;
  }
  return out;
}

double log_divergent_pmf(double c, double a, std::int64_t n) {
  const double dn = static_cast<double>(n);
  return c / (dn * dn * std::pow(std::log(dn), a));
}

}  // namespace

OffspringLaw validate_law(LawSpec spec) {
  OffspringLaw law;
  if (auto* finite = std::get_if<FiniteLaw>(&spec)) {
    if (finite->atoms.empty()) {
      throw Error(ErrorCode::empty_law, "law has no atoms");
    }
    std::vector<double> probs;
    probs.reserve(finite->atoms.size());
    for (std::size_t j = 0; j < finite->atoms.size(); ++j) {
      const Atom& atom = finite->atoms[j];
      if (!(atom.probability > 0.0) || !(atom.probability <= 1.0)) {
        std::ostringstream msg;
        msg << "atom " << j << ": probability " << atom.probability
            << " is not in (0, 1]";
        throw Error(ErrorCode::invalid_law, msg.str());
      }
      for (std::size_t i = 0; i < atom.count(); ++i) {
        if (!std::isfinite(atom.displacements[i])) {
          std::ostringstream msg;
          msg << "atom " << j << ": displacement " << i << " is not finite";
          throw Error(ErrorCode::invalid_law, msg.str());
        }
      }
      probs.push_back(atom.probability);
    }
    const double total = stable_sum(probs);
    if (std::fabs(total - 1.0) > kNormalizationTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "atom probabilities sum to " << total << ", not 1";
      throw Error(ErrorCode::normalization, msg.str());
    }

    std::vector<double> mean_terms, empty_terms;
    auto cdf = std::make_shared<std::vector<double>>();
    cdf->reserve(finite->atoms.size());
    double running = 0.0;
    for (const Atom& atom : finite->atoms) {
      running += atom.probability;
      cdf->push_back(running);
      mean_terms.push_back(atom.probability * static_cast<double>(atom.count()));
      if (atom.count() == 0) empty_terms.push_back(atom.probability);
      law.max_offspring_ = std::max(law.max_offspring_, atom.count());
    }
    cdf->back() = 1.0;
    law.mean_offspring_ = stable_sum(std::move(mean_terms));
    law.empty_probability_ = stable_sum(std::move(empty_terms));
    law.cdf_ = std::move(cdf);
  } else {
    auto& ld = std::get<LogDivergentLaw>(spec);
    if (!(ld.tail_exponent > 1.0) || !std::isfinite(ld.tail_exponent)) {
      throw Error(ErrorCode::invalid_law, "log_divergent: tail exponent a must be > 1");
    }
    if (ld.n_max < 2) {
      throw Error(ErrorCode::invalid_law, "log_divergent: n_max must be >= 2");
    }
    LogDivergentSeries series = sum_log_divergent(ld);
    if (!(series.mean > 1.0)) {
      throw Error(ErrorCode::subcritical_family,
                  "log_divergent: mean offspring does not exceed 1");
    }

    // Sampling table over n = 2..n_max; tail mass lumped into n_max.
    const std::int64_t n_max = ld.n_max;
    auto cdf = std::make_shared<std::vector<double>>();
    cdf->reserve(static_cast<std::size_t>(n_max - 1));
    double running = 0.0, mean = 0.0, second = 0.0;
    for (std::int64_t n = 2; n < n_max; ++n) {
      const double p = log_divergent_pmf(series.normalizer, ld.tail_exponent, n);
      running += p;
      const double dn = static_cast<double>(n);
      mean += dn * p;
      second += dn * dn * p;
      cdf->push_back(running);
    }
    const double lumped = std::max(0.0, 1.0 - running);
    const double dmax = static_cast<double>(n_max);
    series.truncated_mean = mean + dmax * lumped;
    series.truncated_second_moment = second + dmax * dmax * lumped;
    cdf->push_back(1.0);

    law.mean_offspring_ = series.mean;
    law.max_offspring_ = static_cast<std::size_t>(n_max);
    law.empty_probability_ = 0.0;
    law.series_ = series;
    law.cdf_ = std::move(cdf);
    law.zeros_ = std::make_shared<const std::vector<double>>(
        static_cast<std::size_t>(n_max), 0.0);
  }
  law.spec_ = std::move(spec);
  return law;
}

Draw sample_draw(const OffspringLaw& law, Rng& rng) {
  const double u = uniform01(rng);
  const auto cdf = law.sampling_cdf();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  const auto index = static_cast<std::size_t>(it - cdf.begin());
  if (const FiniteLaw* f = law.finite()) {
    return Draw{index, f->atoms[index].count()};
  }
  return Draw{0, index + 2};
}

std::span<const double> displacements(const OffspringLaw& law, const Draw& draw) {
  if (const FiniteLaw* f = law.finite()) {
    return f->atoms[draw.atom].displacements;
  }
  return std::span<const double>(*law.zeros_).first(draw.count);
}

std::vector<double> sample_realization(const OffspringLaw& law, Rng& rng) {
  const Draw d = sample_draw(law, rng);
  const auto xs = displacements(law, d);
  return {xs.begin(), xs.end()};
}

double pgf_eval(const OffspringLaw& law, double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw Error(ErrorCode::domain, "pgf_eval: s must lie in [0, 1]");
  }
  if (const FiniteLaw* f = law.finite()) {
    std::vector<double> terms;
    terms.reserve(f->atoms.size());
    for (const Atom& atom : f->atoms) {
      terms.push_back(atom.probability *
                      std::pow(s, static_cast<double>(atom.count())));
    }
    return stable_sum(std::move(terms));
  }
  if (s == 1.0) return 1.0;
  const auto& ld = *law.log_divergent();
  const auto& series = law.series();
  // Terms p_n s^n; stop once s^n is negligible against the accumulated sum.
  std::vector<double> terms;
  double power = s * s;
  for (std::int64_t n = 2; n <= series.terms; ++n) {
    if (power < 1e-300) break;
    terms.push_back(log_divergent_pmf(series.normalizer, ld.tail_exponent, n) * power);
    if (power < 1e-20) break;
    power *= s;
  }
  return stable_sum(std::move(terms));
}

double pgf_iterate_from_zero(const OffspringLaw& law, int generations) {
  double s = 0.0;
  for (int i = 0; i < generations; ++i) s = pgf_eval(law, s);
  return s;
}

double extinction_probability(const OffspringLaw& law) {
  const double mean = law.mean_offspring();
  if (mean <= 1.0) {
    // Mean exactly 1 with no empty atom means L == 1 surely.
    return law.empty_probability() == 0.0 ? 0.0 : 1.0;
  }
  constexpr int kMaxIterations = 100000;
  double s = 0.0;
  for (int k = 0; k < kMaxIterations; ++k) {
    const double next = pgf_eval(law, s);
    if (std::fabs(next - s) < 1e-14) return next;
    s = next;
  }
  throw NoConvergenceError("extinction_probability: iteration cap reached", s);
}

double log_tilted_mass(const OffspringLaw& law, double alpha) {
  if (const FiniteLaw* f = law.finite()) {
    std::vector<double> logs;
    for (const Atom& atom : f->atoms) {
      const double lp = std::log(atom.probability);
      for (double x : atom.displacements) logs.push_back(lp - alpha * x);
    }
    return log_sum_exp(logs);
  }
  return std::log(law.series().mean);
}

double tilted_mass(const OffspringLaw& law, double alpha) {
  const FiniteLaw* f = law.finite();
  if (f == nullptr) return law.series().mean;
  if (log_tilted_mass(law, alpha) >= std::log(DBL_MAX)) {
    throw Error(ErrorCode::overflow, "tilted_mass: m(alpha) overflows");
  }
  std::vector<double> terms;
  for (const Atom& atom : f->atoms) {
    for (double x : atom.displacements) {
      terms.push_back(atom.probability * std::exp(-alpha * x));
    }
  }
  const double m = stable_sum(std::move(terms));
  if (!std::isfinite(m)) {
    throw Error(ErrorCode::overflow, "tilted_mass: m(alpha) overflows");
  }
  return m;
}

double tilted_derivative(const OffspringLaw& law, double alpha) {
  const FiniteLaw* f = law.finite();
  if (f == nullptr) return 0.0;
  std::vector<double> terms;
  for (const Atom& atom : f->atoms) {
    for (double x : atom.displacements) {
      terms.push_back(-atom.probability * x * std::exp(-alpha * x));
    }
  }
  const double d = stable_sum(std::move(terms));
  if (!std::isfinite(d)) {
    throw Error(ErrorCode::overflow, "tilted_derivative: m'(alpha) overflows");
  }
  return d + 0.0;  // no negative zero
}

double llogl_moment(const OffspringLaw& law, double alpha) {
  const FiniteLaw* f = law.finite();
  if (f == nullptr) return law.series().llogl;
  std::vector<double> terms;
  for (const Atom& atom : f->atoms) {
    if (atom.count() == 0) continue;
    const double v = atom_tilt(atom, alpha);
    terms.push_back(atom.probability * v * std::max(0.0, std::log(v)));
  }
  return stable_sum(std::move(terms));
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::nontrivial: return "NONTRIVIAL";
    case Classification::trivial_llogl: return "TRIVIAL_LLOGL";
    case Classification::trivial_drift: return "TRIVIAL_DRIFT";
    case Classification::trivial_drift_boundary: return "TRIVIAL_DRIFT_BOUNDARY";
    case Classification::not_supercritical: return "NOT_SUPERCRITICAL";
    case Classification::mass_infinite: return "MASS_INFINITE";
  }
  return "UNKNOWN";
}

bool is_trivial(Classification c) noexcept {
  return c == Classification::trivial_llogl || c == Classification::trivial_drift ||
         c == Classification::trivial_drift_boundary;
}

TiltProfile classify(const OffspringLaw& law, double alpha) {
  TiltProfile p;
  p.alpha = alpha;
  p.log_m = log_tilted_mass(law, alpha);

  const bool supercritical = law.mean_offspring() > 1.0;
  bool overflow = false;
  try {
    p.m = tilted_mass(law, alpha);
    p.m_prime = tilted_derivative(law, alpha);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::overflow) throw;
    overflow = true;
  }

  if (!overflow) {
    p.drift = -(p.m_prime / p.m) + 0.0;
    p.llogl = llogl_moment(law, alpha);
    p.gap = p.log_m - alpha * p.m_prime / p.m;
  } else {
    p.m = kPosInf;
    p.m_prime = std::numeric_limits<double>::quiet_NaN();
    p.drift = std::numeric_limits<double>::quiet_NaN();
    p.llogl = kPosInf;
    p.gap = kNegInf;
  }

  std::ostringstream why;
  if (!supercritical) {
    p.classification = Classification::not_supercritical;
    why << "m(0) = " << law.mean_offspring() << " <= 1";
  } else if (overflow) {
    p.classification = Classification::mass_infinite;
    why << "m(alpha) is not finite (log m = " << p.log_m << ")";
  } else if (std::isinf(p.llogl)) {
    p.classification = Classification::trivial_llogl;
    why << "E[<a,L> log+ <a,L>] is infinite";
  } else if (std::fabs(p.gap) <= kBoundaryTolerance) {
    p.classification = Classification::trivial_drift_boundary;
    why << "alpha m'/m = log m within " << kBoundaryTolerance;
  } else if (p.gap < 0.0) {
    p.classification = Classification::trivial_drift;
    why << "alpha m'/m >= log m (gap " << p.gap << ")";
  } else {
    p.classification = Classification::nontrivial;
    why << "llogl finite and alpha m'/m < log m (gap " << p.gap << ")";
  }
  p.reason = why.str();
  return p;
}

std::vector<double> size_biased_weights(const OffspringLaw& law, double alpha) {
  const FiniteLaw& f = require_finite(law, "size_biased_weights");
  const double m = tilted_mass(law, alpha);
  if (!(m > 0.0)) {
    throw Error(ErrorCode::zero_mass, "size-biased law undefined: m(alpha) = 0");
  }
  std::vector<double> w;
  w.reserve(f.atoms.size());
  for (const Atom& atom : f.atoms) {
    w.push_back(atom.count() == 0 ? 0.0 : atom.probability * atom_tilt(atom, alpha) / m);
  }
  return w;
}

OffspringLaw size_biased_law(const OffspringLaw& law, double alpha) {
  const FiniteLaw& f = require_finite(law, "size_biased_law");
  const auto w = size_biased_weights(law, alpha);
  FiniteLaw out;
  for (std::size_t j = 0; j < f.atoms.size(); ++j) {
    if (f.atoms[j].count() == 0 || w[j] == 0.0) continue;
    // A lone dominant atom can round to just above 1.
    out.atoms.push_back(Atom{std::min(w[j], 1.0), f.atoms[j].displacements});
  }
  return validate_law(std::move(out));
}

std::vector<StepProbability> spine_step_law(const OffspringLaw& law, double alpha) {
  const FiniteLaw& f = require_finite(law, "spine_step_law");
  const double m = tilted_mass(law, alpha);
  if (!(m > 0.0)) {
    throw Error(ErrorCode::zero_mass, "spine step law undefined: m(alpha) = 0");
  }
  std::map<double, std::vector<double>> by_value;
  for (const Atom& atom : f.atoms) {
    for (double x : atom.displacements) {
      by_value[x + 0.0].push_back(atom.probability * std::exp(-alpha * x) / m);
    }
  }
  std::vector<StepProbability> out;
  out.reserve(by_value.size());
  for (auto& [x, terms] : by_value) {
    out.push_back({x, stable_sum(std::move(terms))});
  }
  return out;
}

KahaneCheck kahane_bound_check(const OffspringLaw& law, double alpha) {
  const FiniteLaw& f = require_finite(law, "kahane_bound_check");
  KahaneCheck k;
  k.lhs = llogl_moment(law, alpha);
  const double max_count = static_cast<double>(law.max_offspring());
  const double log_max = max_count >= 1.0 ? std::log(max_count) : 0.0;
  const double m = tilted_mass(law, alpha);
  k.rhs = std::fabs(tilted_derivative(law, alpha)) + log_max * m;
  k.holds = k.lhs <= k.rhs + 1e-12;
  std::vector<double> terms;
  for (const Atom& atom : f.atoms) {
    for (double x : atom.displacements) {
      terms.push_back(atom.probability * std::fabs(alpha * x) * std::exp(-alpha * x));
    }
  }
  k.entropy_rhs = stable_sum(std::move(terms)) + log_max * m;
  k.entropy_holds = k.lhs <= k.entropy_rhs + 1e-12;
  return k;
}

}  // namespace brw
