#pragma once

// Offspring laws for a branching random walk and their exact tilted
// functionals.
//
// Sign convention for the derivative: m_prime is the analytic derivative
//
//   m'(alpha) = d/dalpha E[sum_i exp(-alpha X_i)] = -E[sum_i X_i exp(-alpha X_i)]
//
// so that the spine drift is -m'(alpha)/m(alpha) = E-hat[X] (the mean step of
// the distinguished ray) and the nontriviality condition reads
// alpha m'(alpha)/m(alpha) < log m(alpha). Writing m' without the minus sign
// flips the drift and breaks the classification.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "brw/rng.hpp"

namespace brw {

/// One realization of the point process: the ordered displacements of the
/// children, and the probability of seeing exactly this realization.
struct Atom {
  double probability = 0.0;
  std::vector<double> displacements;

  std::size_t count() const noexcept { return displacements.size(); }
};

struct FiniteLaw {
  std::vector<Atom> atoms;
};

/// P[L = n] = c / (n^2 (log n)^a) for n >= 2, every displacement 0.
/// E[L log L] is infinite exactly when a <= 2. Simulation truncates the
/// support at n_max and lumps the tail mass there; all exact functionals use
/// the untruncated law.
struct LogDivergentLaw {
  double tail_exponent = 2.0;
  std::int64_t n_max = 1'000'000;
};

using LawSpec = std::variant<FiniteLaw, LogDivergentLaw>;

/// Series data for a validated LogDivergentLaw. Each value is a truncated sum
/// plus the midpoint of a closed-form tail bracket; *_error bounds the
/// absolute error.
struct LogDivergentSeries {
  std::int64_t terms = 0;  ///< summed n = 2..terms
  double normalizer = 0.0;  ///< c
  double mean = 0.0;        ///< E[L]
  double mean_error = 0.0;
  double llogl = 0.0;  ///< E[L log L], +inf when a <= 2
  double llogl_error = 0.0;
  double truncated_mean = 0.0;  ///< mean of the n_max-truncated sampling law
  double truncated_second_moment = 0.0;
};

struct Draw;

/// A law that passed validate_law(). Immutable and cheap to copy.
class OffspringLaw {
 public:
  const LawSpec& spec() const noexcept { return spec_; }
  bool is_finite() const noexcept {
    return std::holds_alternative<FiniteLaw>(spec_);
  }
  /// nullptr unless is_finite().
  const FiniteLaw* finite() const noexcept { return std::get_if<FiniteLaw>(&spec_); }
  const LogDivergentLaw* log_divergent() const noexcept {
    return std::get_if<LogDivergentLaw>(&spec_);
  }

  /// m(0) = E[L].
  double mean_offspring() const noexcept { return mean_offspring_; }
  /// Warning flag only; classify() decides NOT_SUPERCRITICAL.
  bool supercritical() const noexcept { return mean_offspring_ > 1.0; }
  /// Largest offspring count in the support (n_max for the log-divergent law
  /// as simulated).
  std::size_t max_offspring() const noexcept { return max_offspring_; }
  /// Probability of an empty realization.
  double empty_probability() const noexcept { return empty_probability_; }

  /// Only meaningful for the log-divergent family.
  const LogDivergentSeries& series() const noexcept { return series_; }

  /// Cumulative atom probabilities (finite) or truncated count CDF over
  /// n = 2..n_max (log-divergent). Last entry is forced to 1.
  std::span<const double> sampling_cdf() const noexcept { return *cdf_; }

 private:
  friend OffspringLaw validate_law(LawSpec spec);

  LawSpec spec_;
  double mean_offspring_ = 0.0;
  std::size_t max_offspring_ = 0;
  double empty_probability_ = 0.0;
  LogDivergentSeries series_{};
  std::shared_ptr<const std::vector<double>> cdf_;
  std::shared_ptr<const std::vector<double>> zeros_;

  friend std::span<const double> displacements(const OffspringLaw&, const Draw&);
};

/// Checks normalization (1e-12 absolute), positivity and finiteness. For the
/// log-divergent family computes c, E[L] and E[L log L] by series summation
/// with integral tail bounds. Throws Error (normalization, empty_law,
/// invalid_law, subcritical_family).
OffspringLaw validate_law(LawSpec spec);

/// One sampled realization, by reference into the law.
struct Draw {
  std::size_t atom = 0;   ///< atom index (finite laws); unused otherwise
  std::size_t count = 0;  ///< offspring count
};

/// Samples a realization by inversion of the cumulative probabilities. Uses
/// exactly one uniform01() draw.
Draw sample_draw(const OffspringLaw& law, Rng& rng);

/// Displacements of a drawn realization; valid while the law is alive.
std::span<const double> displacements(const OffspringLaw& law, const Draw& draw);

/// Convenience: sample_draw() copied out as a displacement list.
std::vector<double> sample_realization(const OffspringLaw& law, Rng& rng);

/// f(s) = E[s^L]. Throws domain for s outside [0, 1].
double pgf_eval(const OffspringLaw& law, double s);

/// f^(n)(0) = P[extinct by generation n].
double pgf_iterate_from_zero(const OffspringLaw& law, int generations);

/// Smallest fixed point of f on [0, 1]. Laws with mean <= 1 return 1
/// directly (or 0 when L == 1 surely); otherwise monotone iteration from 0
/// until successive iterates differ by < 1e-14, capped at 1e5 steps
/// (throws NoConvergenceError with the last iterate).
double extinction_probability(const OffspringLaw& law);

/// log m(alpha), via log-sum-exp so it stays finite when m overflows.
double log_tilted_mass(const OffspringLaw& law, double alpha);

/// m(alpha). Throws overflow if it is not representable.
double tilted_mass(const OffspringLaw& law, double alpha);

/// m'(alpha) = -E[sum X_i exp(-alpha X_i)]. Throws overflow.
double tilted_derivative(const OffspringLaw& law, double alpha);

/// E[<alpha,L> log+ <alpha,L>]; +inf when infinite.
double llogl_moment(const OffspringLaw& law, double alpha);

enum class Classification {
  nontrivial,
  trivial_llogl,
  trivial_drift,
  trivial_drift_boundary,
  not_supercritical,
  mass_infinite,
};

std::string to_string(Classification c);
bool is_trivial(Classification c) noexcept;

/// |gap| at or below this is treated as the critical boundary.
inline constexpr double kBoundaryTolerance = 1e-9;

struct TiltProfile {
  double alpha = 0.0;
  double m = 0.0;
  double m_prime = 0.0;
  double drift = 0.0;  ///< -m_prime / m
  double log_m = 0.0;
  double llogl = 0.0;  ///< +inf encodes INFINITE
  double gap = 0.0;    ///< log_m - alpha * m_prime / m; -inf when mass infinite
  Classification classification = Classification::nontrivial;
  std::string reason;

  friend bool operator==(const TiltProfile&, const TiltProfile&) = default;
};

TiltProfile classify(const OffspringLaw& law, double alpha);

/// p_j <alpha, l_j> / m(alpha) for each atom j, aligned with the input atoms
/// (empty atoms get 0). Finite laws only.
std::vector<double> size_biased_weights(const OffspringLaw& law, double alpha);

/// The size-biased law: reweighted atoms with the empty ones dropped. Throws
/// zero_mass if m(alpha) == 0 and invalid_argument for non-finite laws.
OffspringLaw size_biased_law(const OffspringLaw& law, double alpha);

struct StepProbability {
  double displacement = 0.0;
  double probability = 0.0;
};

/// Marginal law of one spine step, sorted by displacement.
std::vector<StepProbability> spine_step_law(const OffspringLaw& law, double alpha);

struct KahaneCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  /// |a| E[sum |X_i| exp(-a X_i)] + log(max L) m(a). Always >= lhs (the
  /// entropy of the weights exp(-a X_i)/<a,L> is at most log L). The bound
  /// with |m'(a)| can fail once displacements take both signs.
  double entropy_rhs = 0.0;
  bool entropy_holds = false;
};

/// E[<a,L> log+ <a,L>] <= |m'(a)| + log(max L) m(a), up to 1e-12.
KahaneCheck kahane_bound_check(const OffspringLaw& law, double alpha);

}  // namespace brw
