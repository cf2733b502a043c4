#pragma once

// Size-biased trees with a distinguished ray.
//
// Random streams: for replicate seed s the spine uses derive_seed(s, 0); the
// off-spine subtree rooted at birth slot j of spine node v_k uses
// derive_seed(derive_seed(s, k + 1), j). The spine is therefore identical
// whether or not the off-spine subtrees are grown, and growth order does not
// affect the result.

#include <cstddef>
#include <vector>

#include "brw/brw_sim.hpp"
#include "brw/offspring_model.hpp"
#include "brw/rng.hpp"

namespace brw {

/// The ray alone: v_0..v_depth with their reproduction events.
struct SpinePath {
  double alpha = 0.0;
  double log_m = 0.0;
  std::vector<double> positions;     ///< S(v_k), k = 0..depth
  std::vector<double> log_weights;   ///< -alpha S(v_k) - k log m, accumulated
  std::vector<std::size_t> atoms;    ///< atom index of v_k's size-biased litter, k < depth
  std::vector<std::size_t> slots;    ///< birth slot of v_{k+1} among v_k's children

  int depth() const noexcept { return static_cast<int>(positions.size()) - 1; }
};

/// Samples the ray only: at each level draw the litter from the size-biased
/// law, then pick the next spine child with probability proportional to
/// exp(-alpha X). Requires a finite law with m(alpha) > 0.
SpinePath sample_spine_path(const OffspringLaw& law, double alpha, int depth, Seed seed);

struct SpinedTree {
  LabelledTree tree;
  std::vector<NodeIndex> ray;  ///< v_0..v_depth
  std::vector<double> spine_log_weight;
  double alpha = 0.0;
  double log_m = 0.0;
};

/// The cap was hit while growing the embedded tree. path() is complete;
/// partial() holds the fully grown generations.
class SpinePopulationCapError : public PopulationCapError {
 public:
  SpinePopulationCapError(const std::string& message, LabelledTree partial,
                          int generation_reached, SpinePath path)
      : PopulationCapError(message, std::move(partial), generation_reached),
        path_(std::move(path)) {}

  const SpinePath& path() const noexcept { return path_; }

 private:
  SpinePath path_;
};

/// The spine from sample_spine_path() plus ordinary BRWs below every
/// off-spine child, grown breadth-first across the whole tree to `depth`.
SpinedTree grow_spined_tree(const OffspringLaw& law, double alpha, int depth,
                            const GrowthCaps& caps, Seed seed);

/// S(v_0), ..., S(v_depth).
std::vector<double> spine_positions(const SpinedTree& spined);

/// log of exp(-alpha S(v_level)) / m(alpha)^level. Throws level_out_of_range.
double rn_weight(const SpinedTree& spined, int level);

/// log(1 / W_n) of the embedded tree for n = 0..depth.
std::vector<double> importance_weights(const SpinedTree& spined, double alpha, double log_m);

}  // namespace brw
