#include "brw/brw_sim.hpp"

#include <string>

#include "brw/numeric.hpp"
#include "tree_builder.hpp"

namespace brw {

LabelledTree grow_tree(const OffspringLaw& law, int depth, const GrowthCaps& caps, Rng& rng) {
  if (depth < 0 || depth > caps.max_depth) {
    throw Error(ErrorCode::invalid_argument,
                "grow_tree: depth " + std::to_string(depth) + " outside [0, max_depth]");
  }
  TreeBuilder builder(caps.max_nodes);
  for (int g = 0; g < depth; ++g) {
    const NodeIndex begin = builder.tree().generation_begin(g);
    const NodeIndex end = builder.tree().generation_end(g);
    try {
      for (NodeIndex v = begin; v < end; ++v) {
        const Draw draw = sample_draw(law, rng);
        for (double x : displacements(law, draw)) builder.add_child(v, x);
      }
    } catch (const TreeBuilder::CapReached&) {
      throw PopulationCapError("grow_tree: node cap " + std::to_string(caps.max_nodes) +
                                   " reached while growing generation " + std::to_string(g + 1),
                               builder.take_partial(), g);
    }
    builder.close_generation();
  }
  return builder.take();
}

WTrajectory w_trajectory(const LabelledTree& tree, double alpha, double log_m) {
  WTrajectory out;
  out.alpha = alpha;
  out.log_m = log_m;
  const int depth = tree.depth_grown();
  out.log_w.reserve(static_cast<std::size_t>(depth) + 1);
  out.population.reserve(static_cast<std::size_t>(depth) + 1);
  std::vector<double> exponents;
  for (int n = 0; n <= depth; ++n) {
    const auto gen = tree.generation(n);
    exponents.clear();
    for (const NodeRecord& v : gen) exponents.push_back(-alpha * v.position);
    const double lse = log_sum_exp(exponents);
    out.log_w.push_back(gen.empty() ? kNegInf : lse - static_cast<double>(n) * log_m);
    out.population.push_back(static_cast<std::int64_t>(gen.size()));
  }
  return out;
}

std::vector<std::int64_t> generation_sizes(const LabelledTree& tree) {
  std::vector<std::int64_t> z;
  for (int n = 0; n <= tree.depth_grown(); ++n) {
    z.push_back(static_cast<std::int64_t>(tree.generation_size(n)));
  }
  return z;
}

}  // namespace brw
