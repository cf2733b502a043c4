#pragma once

// Seeded Monte Carlo estimators. Replicate r draws from
// derive_seed(master_seed, r); results are merged in replicate order, so
// every summary is bit-identical for any worker count.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "brw/brw_sim.hpp"
#include "brw/exact_oracle.hpp"
#include "brw/offspring_model.hpp"
#include "brw/rng.hpp"

namespace brw {

struct McConfig {
  std::int64_t replicates = 1000;
  int depth = 10;
  Seed master_seed{};
  GrowthCaps caps{};
  unsigned workers = 0;  ///< 0: hardware concurrency
};

/// Acceptance band half-width in standard errors.
inline constexpr double kSigmaBand = 4.0;
/// Fraction of replicates that may hit the node cap before an estimator fails.
inline constexpr double kMaxDiscardFraction = 0.01;

struct McSummary {
  std::string estimator;
  double estimate = 0.0;
  double se = 0.0;
  std::int64_t n = 0;          ///< replicates that entered the estimate
  std::int64_t discarded = 0;  ///< cap hits, excluded and reported
  std::uint64_t seed = 0;
  double reference_value = 0.0;
  double reference_se = 0.0;  ///< nonzero when the reference is itself MC
  bool pass = false;
  /// Set when the estimate is known to be untrustworthy (e.g. the mean of W_n
  /// for a trivially classified law, where rare huge values carry the mean).
  bool unreliable = false;
  std::string note;
  /// Per-replicate terminal values in replicate order; NaN marks discards.
  std::vector<double> values;
  /// mc_importance_identity only: E_mu[f ; Z_n > 0], the value the estimator
  /// actually targets. NaN elsewhere.
  double survival_reference = std::numeric_limits<double>::quiet_NaN();
};

/// Mean of W_depth over ordinary trees; reference 1.
McSummary mc_mean_w(const OffspringLaw& law, double alpha, const McConfig& cfg);

/// Mean of S(v_depth)/depth along sampled spines; reference -m'/m. Only the
/// ray is sampled (its law does not depend on the off-spine subtrees), so
/// depth is not limited by the node cap.
McSummary mc_spine_slope(const OffspringLaw& law, double alpha, const McConfig& cfg);

/// Fraction extinct by cfg.depth; reference f^(depth)(0). Simulates the
/// generation sizes only, drawing the litter-type counts of each generation
/// as a multinomial.
McSummary mc_extinction(const OffspringLaw& law, const McConfig& cfg);

enum class TrivialityVerdict { decaying, stable, inconclusive };
std::string to_string(TrivialityVerdict v);

struct TrivialityPoint {
  int depth = 0;
  double surviving_fraction = 0.0;
  double median_log_w = 0.0;  ///< among survivors; NaN if none
  double mean_log_w = 0.0;    ///< among survivors; NaN if none
};

struct TrivialityReport {
  double alpha = 0.0;
  std::vector<TrivialityPoint> points;
  TrivialityVerdict verdict = TrivialityVerdict::inconclusive;
  Classification classification = Classification::nontrivial;
  bool contradicts_classification = false;
  std::uint64_t seed = 0;
  std::int64_t pool_size = 0;
};

/// Median log W_n thresholds for the verdict.
inline constexpr double kDecayNats = 1.0;
inline constexpr double kStableNats = 0.5;

/// Tracks the law of log W_n over the depth grid with a pool of
/// cfg.replicates samples: each step builds W_{n+1} = sum_i exp(-alpha X_i) /
/// m * W_n^(i) from one fresh litter and pool members drawn uniformly. Exact
/// trees are infeasible at these depths. Verdict: DECAYING if the survivors'
/// median log W_n falls by >= 1 nat from first to last grid point and never
/// rises along the grid; STABLE if it stays within 0.5 nat of its value at the
/// first grid point; INCONCLUSIVE otherwise (or when a grid point has no
/// survivors).
TrivialityReport mc_triviality_scan(const OffspringLaw& law, double alpha,
                                    const std::vector<int>& depth_grid, const McConfig& cfg);

/// Bounded F_n-measurable test functionals of the generation-n population.
struct Functional {
  enum class Kind { one, population_equals, population_min, exp_neg_max_position };
  Kind kind = Kind::one;
  std::int64_t k = 0;  ///< target count / clamp for the population functionals
  double beta = 1.0;   ///< rate for exp_neg_max_position

  static Functional one() { return {}; }
  static Functional population_equals(std::int64_t k) { return {Kind::population_equals, k, 1.0}; }
  static Functional population_min(std::int64_t k) { return {Kind::population_min, k, 1.0}; }
  static Functional exp_neg_max_position(double beta) {
    return {Kind::exp_neg_max_position, 0, beta};
  }

  std::string name() const;
  /// Value on generation n of a simulated tree. Empty generation gives 0
  /// except for one().
  double operator()(const LabelledTree& tree, int n) const;
  /// Value on generation n of an enumerated outcome.
  double operator()(const OutcomeTree& tree, int n) const;
};

/// Estimates E_mu-hat[f / W_depth] from spined trees and compares it with
/// E_mu[f], exact when the enumeration is feasible and otherwise a direct
/// mu-MC estimate (combined SE). The change of measure gives
/// E_mu-hat[f / W_n] = E_mu[f ; Z_n > 0]; that value is reported as
/// survival_reference.
McSummary mc_importance_identity(const OffspringLaw& law, double alpha, const McConfig& cfg,
                                 const Functional& f);

}  // namespace brw
