#include "brw/spine_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "brw/numeric.hpp"
#include "tree_builder.hpp"

namespace brw {

namespace {

// Cumulative tables for the size-biased litter and the child choice.
class SpineSampler {
 public:
  SpineSampler(const OffspringLaw& law, double alpha) : law_(law), alpha_(alpha) {
    const FiniteLaw* f = law.finite();
    if (f == nullptr) {
      throw Error(ErrorCode::invalid_argument, "spine sampling requires a finite law");
    }
    log_m_ = std::log(tilted_mass(law, alpha));
    const auto weights = size_biased_weights(law, alpha);
    double running = 0.0;
    for (std::size_t j = 0; j < f->atoms.size(); ++j) {
      running += weights[j];
      atom_cdf_.push_back(running);
      const auto& xs = f->atoms[j].displacements;
      std::vector<double> terms;
      for (double x : xs) terms.push_back(std::exp(-alpha * x));
      const double total = stable_sum(terms);
      std::vector<double> cdf;
      double acc = 0.0;
      for (double t : terms) {
        acc += t / total;
        cdf.push_back(acc);
      }
      if (!cdf.empty()) cdf.back() = 1.0;
      child_cdf_.push_back(std::move(cdf));
    }
    // Last atom with positive weight closes the table.
    for (std::size_t j = atom_cdf_.size(); j-- > 0;) {
      if (weights[j] > 0.0) {
        for (std::size_t k = j; k < atom_cdf_.size(); ++k) atom_cdf_[k] = 1.0;
        break;
      }
    }
  }

  double log_m() const noexcept { return log_m_; }

  std::size_t draw_atom(Rng& rng) const {
    const double u = uniform01(rng);
    auto it = std::upper_bound(atom_cdf_.begin(), atom_cdf_.end(), u);
    if (it == atom_cdf_.end()) --it;
    return static_cast<std::size_t>(it - atom_cdf_.begin());
  }

  std::size_t draw_slot(std::size_t atom, Rng& rng) const {
    const auto& cdf = child_cdf_[atom];
    const double u = uniform01(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<std::size_t>(it - cdf.begin());
  }

  const std::vector<double>& litter(std::size_t atom) const {
    return law_.finite()->atoms[atom].displacements;
  }

 private:
  const OffspringLaw& law_;
  double alpha_;
  double log_m_ = 0.0;
  std::vector<double> atom_cdf_;
  std::vector<std::vector<double>> child_cdf_;
};

SpinePath sample_path(const SpineSampler& sampler, double alpha, int depth, Seed seed) {
  SpinePath path;
  path.alpha = alpha;
  path.log_m = sampler.log_m();
  path.positions.reserve(static_cast<std::size_t>(depth) + 1);
  path.log_weights.reserve(static_cast<std::size_t>(depth) + 1);
  path.positions.push_back(0.0);
  path.log_weights.push_back(0.0);
  Rng rng = make_rng(derive_seed(seed, 0));
  for (int k = 0; k < depth; ++k) {
    const std::size_t atom = sampler.draw_atom(rng);
    const std::size_t slot = sampler.draw_slot(atom, rng);
    const double x = sampler.litter(atom)[slot];
    path.atoms.push_back(atom);
    path.slots.push_back(slot);
    path.positions.push_back(path.positions.back() + x);
    path.log_weights.push_back(path.log_weights.back() + (-alpha * x - path.log_m));
  }
  return path;
}

}  // namespace

SpinePath sample_spine_path(const OffspringLaw& law, double alpha, int depth, Seed seed) {
  if (depth < 0) throw Error(ErrorCode::invalid_argument, "spine depth must be >= 0");
  const SpineSampler sampler(law, alpha);
  return sample_path(sampler, alpha, depth, seed);
}

SpinedTree grow_spined_tree(const OffspringLaw& law, double alpha, int depth,
                            const GrowthCaps& caps, Seed seed) {
  if (depth < 0 || depth > caps.max_depth) {
    throw Error(ErrorCode::invalid_argument, "grow_spined_tree: depth outside [0, max_depth]");
  }
  const SpineSampler sampler(law, alpha);
  SpinePath path = sample_path(sampler, alpha, depth, seed);

  TreeBuilder builder(caps.max_nodes);
  std::vector<NodeIndex> ray{0};
  // Stream owning each node; -1 marks the spine.
  std::vector<std::ptrdiff_t> stream_of{-1};
  std::vector<Rng> streams;

  for (int g = 0; g < depth; ++g) {
    const NodeIndex begin = builder.tree().generation_begin(g);
    const NodeIndex end = builder.tree().generation_end(g);
    try {
      for (NodeIndex v = begin; v < end; ++v) {
        const std::ptrdiff_t stream = stream_of[v];
        if (stream < 0) {
          const auto k = static_cast<std::size_t>(g);
          const auto& litter = sampler.litter(path.atoms[k]);
          const Seed level_seed = derive_seed(seed, k + 1);
          for (std::size_t j = 0; j < litter.size(); ++j) {
            const NodeIndex child = builder.add_child(v, litter[j]);
            if (j == path.slots[k]) {
              ray.push_back(child);
              stream_of.push_back(-1);
            } else {
              streams.push_back(make_rng(derive_seed(level_seed, j)));
              stream_of.push_back(static_cast<std::ptrdiff_t>(streams.size() - 1));
            }
          }
        } else {
          const Draw draw = sample_draw(law, streams[static_cast<std::size_t>(stream)]);
          for (double x : displacements(law, draw)) {
            builder.add_child(v, x);
            stream_of.push_back(stream);
          }
        }
      }
    } catch (const TreeBuilder::CapReached&) {
      throw SpinePopulationCapError(
          "grow_spined_tree: node cap " + std::to_string(caps.max_nodes) +
              " reached while growing generation " + std::to_string(g + 1),
          builder.take_partial(), g, std::move(path));
    }
    builder.close_generation();
  }

  SpinedTree out;
  out.tree = builder.take();
  out.ray = std::move(ray);
  out.spine_log_weight = std::move(path.log_weights);
  out.alpha = alpha;
  out.log_m = path.log_m;
  return out;
}

std::vector<double> spine_positions(const SpinedTree& spined) {
  std::vector<double> s;
  s.reserve(spined.ray.size());
  for (NodeIndex v : spined.ray) s.push_back(spined.tree.node(v).position);
  return s;
}

double rn_weight(const SpinedTree& spined, int level) {
  if (level < 0 || static_cast<std::size_t>(level) >= spined.spine_log_weight.size()) {
    throw Error(ErrorCode::level_out_of_range,
                "rn_weight: level " + std::to_string(level) + " outside the spine");
  }
  return spined.spine_log_weight[static_cast<std::size_t>(level)];
}

std::vector<double> importance_weights(const SpinedTree& spined, double alpha, double log_m) {
  const WTrajectory traj = w_trajectory(spined.tree, alpha, log_m);
  std::vector<double> out;
  out.reserve(traj.log_w.size());
  for (double lw : traj.log_w) out.push_back(-lw);
  return out;
}

}  // namespace brw
