#pragma once

// Exhaustive enumeration of labelled trees (and trees with a distinguished
// ray) to a small depth, and exact checks of the measure-change identities
// against those enumerations.
//
// An outcome is identified by the atom index chosen at every node of
// generations 0..depth-1, listed breadth-first with children in birth order.
// Particles are ordered and distinguishable; no quotient by isomorphism.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "brw/offspring_model.hpp"

namespace brw {

/// Refuse enumerations whose projected outcome count exceeds this.
inline constexpr double kMaxOutcomes = 1e7;
/// Max discrepancy allowed for the identity checks (relative once the
/// compared magnitude exceeds 1).
inline constexpr double kIdentityTolerance = 1e-10;
inline constexpr double kMassTolerance = 1e-12;

struct OutcomeTree {
  std::vector<std::uint32_t> atoms;              ///< breadth-first atom choices
  std::vector<std::vector<double>> positions;    ///< positions[n][i]: S of i-th node of gen n
  std::vector<std::size_t> prefix_length;        ///< #choices made in generations < n
  double probability = 0.0;                      ///< mu_depth(t)

  int depth() const noexcept { return static_cast<int>(positions.size()) - 1; }
};

struct SpinedOutcome {
  OutcomeTree tree;
  std::vector<std::size_t> ray;  ///< ray[n]: index of xi_n within generation n
  std::vector<double> steps;     ///< steps[n-1] = X(xi_n), n = 1..depth
  double probability = 0.0;      ///< mu-hat*_depth(t, xi)
};

/// log10 of the projected outcome count for mu (rays == false) or
/// mu-hat* (rays == true).
double log10_outcome_estimate(const OffspringLaw& law, int depth, bool rays);

/// Visits every labelled outcome to `depth` exactly once with its
/// mu-probability. Finite laws only; throws TooLargeError.
void enumerate_mu(const OffspringLaw& law, int depth,
                  const std::function<void(const OutcomeTree&)>& visit);

/// Visits every (tree, ray) outcome of the spine construction to `depth`:
/// spine litters from the size-biased law, next spine vertex chosen with
/// probability exp(-alpha x_j) / <alpha, l>, everything else ordinary.
void enumerate_mu_hat_star(const OffspringLaw& law, double alpha, int depth,
                           const std::function<void(const SpinedOutcome&)>& visit);

/// W_n(t) by direct summation: sum_i exp(-alpha S_i) / m^n.
double w_value(const OutcomeTree& t, int n, double alpha, double m);

struct CheckResult {
  std::string check;
  std::string law;
  double alpha = 0.0;
  int depth = 0;
  double max_discrepancy = 0.0;
  std::size_t outcomes = 0;
  bool pass = false;
};

using EnumerationReport = std::vector<CheckResult>;

/// mu-hat*(t, xi) = mu(t) exp(-alpha S(xi_n)) / m^n for every pair.
CheckResult check_goal(const OffspringLaw& law, double alpha, int depth,
                       const std::string& law_id = "");
/// sum over rays of mu-hat*(t, xi) = mu(t) W_n(t) for every tree.
CheckResult check_rn(const OffspringLaw& law, double alpha, int depth,
                     const std::string& law_id = "");
/// sum_t mu(t) W_n(t) = 1 for n = 0..depth (tolerance 1e-12).
CheckResult check_mean_w(const OffspringLaw& law, double alpha, int depth,
                         const std::string& law_id = "");
/// E_mu[W_{n+1} | first n levels] = W_n for n < depth.
CheckResult check_martingale(const OffspringLaw& law, double alpha, int depth,
                             const std::string& law_id = "");
/// E_mu-hat[1/W_{n+1} | first n levels] = 1/W_n for n < depth. This only
/// holds when P[L = 0] = 0; see check_inverse_martingale_survival.
CheckResult check_inverse_martingale(const OffspringLaw& law, double alpha, int depth,
                                     const std::string& law_id = "");
/// E_mu-hat[1/W_{n+1} | first n levels] = P_mu[Z_{n+1} > 0 | first n levels] / W_n,
/// the exact relation for any law.
CheckResult check_inverse_martingale_survival(const OffspringLaw& law, double alpha,
                                              int depth, const std::string& law_id = "");
/// Mean and full marginal law of X(v_{k+1}) under mu-hat* against the drift
/// and spine_step_law(), for every k < depth.
CheckResult check_spine_mean(const OffspringLaw& law, double alpha, int depth,
                             const std::string& law_id = "");

/// The six checks in order (goal, rn, mean_w, martingale,
/// inverse_martingale, spine_mean) followed by inverse_martingale_survival.
EnumerationReport run_all_checks(const OffspringLaw& law, double alpha, int depth,
                                 const std::string& law_id = "");

/// Exact E_mu[f(t)] over depth-`depth` outcomes.
double exact_expectation(const OffspringLaw& law, int depth,
                         const std::function<double(const OutcomeTree&)>& f);

}  // namespace brw
