#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "brw/error.hpp"
#include "brw/offspring_model.hpp"
#include "brw/rng.hpp"

namespace brw {

using NodeIndex = std::uint32_t;
inline constexpr NodeIndex kNoParent = std::numeric_limits<NodeIndex>::max();

/// One particle. The root has parent kNoParent, displacement 0, position 0.
struct NodeRecord {
  NodeIndex parent = kNoParent;
  double displacement = 0.0;
  double position = 0.0;
  int generation = 0;
};

/// Genealogy stored generation-major: generation n occupies the contiguous
/// node range [offset(n), offset(n + 1)), children in birth order.
class LabelledTree {
 public:
  std::span<const NodeRecord> nodes() const noexcept { return nodes_; }
  const NodeRecord& node(NodeIndex i) const { return nodes_.at(i); }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Generations 0..depth_grown() are complete (possibly empty).
  int depth_grown() const noexcept { return static_cast<int>(offsets_.size()) - 2; }
  /// First empty generation, if any.
  std::optional<int> extinct_at() const noexcept { return extinct_at_; }

  NodeIndex generation_begin(int n) const { return offsets_.at(static_cast<std::size_t>(n)); }
  NodeIndex generation_end(int n) const { return offsets_.at(static_cast<std::size_t>(n) + 1); }
  std::size_t generation_size(int n) const { return generation_end(n) - generation_begin(n); }
  std::span<const NodeRecord> generation(int n) const {
    return std::span<const NodeRecord>(nodes_).subspan(generation_begin(n),
                                                       generation_size(n));
  }

 private:
  friend class TreeBuilder;

  std::vector<NodeRecord> nodes_;
  std::vector<NodeIndex> offsets_;
  std::optional<int> extinct_at_;
};

struct GrowthCaps {
  std::size_t max_nodes = 1'000'000;
  int max_depth = 1'000'000;
};

/// Growth stopped at the node cap. partial() holds generations
/// 0..generation_reached() complete; the interrupted generation is dropped.
class PopulationCapError : public Error {
 public:
  PopulationCapError(const std::string& message, LabelledTree partial, int generation_reached)
      : Error(ErrorCode::population_cap, message),
        partial_(std::move(partial)),
        generation_reached_(generation_reached) {}

  const LabelledTree& partial() const noexcept { return partial_; }
  int generation_reached() const noexcept { return generation_reached_; }

 private:
  LabelledTree partial_;
  int generation_reached_;
};

/// Breadth-first growth to `depth` generations: every node in generations
/// 0..depth-1 consumes one sample_draw() from `rng`, in node order.
/// Throws PopulationCapError, or Error(invalid_argument) if depth is
/// negative or exceeds caps.max_depth.
LabelledTree grow_tree(const OffspringLaw& law, int depth, const GrowthCaps& caps, Rng& rng);

/// log W_n per generation: log_w[n] = -inf exactly when population[n] == 0.
struct WTrajectory {
  double alpha = 0.0;
  double log_m = 0.0;
  std::vector<double> log_w;
  std::vector<std::int64_t> population;
};

/// log_w[n] = logsumexp_{|s| = n}(-alpha S(s)) - n log_m, for n = 0..depth_grown.
WTrajectory w_trajectory(const LabelledTree& tree, double alpha, double log_m);

/// Z_n for n = 0..depth_grown.
std::vector<std::int64_t> generation_sizes(const LabelledTree& tree);

}  // namespace brw
