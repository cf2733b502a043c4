#pragma once

#include <string>

#include "brw/brw_sim.hpp"

namespace brw {

// Appends generations to a LabelledTree under a node cap.
class TreeBuilder {
 public:
  explicit TreeBuilder(std::size_t max_nodes) : max_nodes_(max_nodes) {
    tree_.nodes_.push_back(NodeRecord{});
    tree_.offsets_ = {0, 1};
  }

  /// Thrown by add_child(); callers turn it into their public error type.
  struct CapReached {};

  const LabelledTree& tree() const noexcept { return tree_; }
  std::size_t size() const noexcept { return tree_.nodes_.size(); }
  int complete_generations() const noexcept { return tree_.depth_grown(); }

  NodeIndex add_child(NodeIndex parent, double displacement) {
    if (tree_.nodes_.size() >= max_nodes_) throw CapReached{};
    const NodeRecord& p = tree_.nodes_[parent];
    NodeRecord child{parent, displacement, p.position + displacement, p.generation + 1};
    tree_.nodes_.push_back(child);
    return static_cast<NodeIndex>(tree_.nodes_.size() - 1);
  }

  /// Seals the generation currently being appended.
  void close_generation() {
    const NodeIndex end = static_cast<NodeIndex>(tree_.nodes_.size());
    if (end == tree_.offsets_.back() && !tree_.extinct_at_) {
      tree_.extinct_at_ = static_cast<int>(tree_.offsets_.size()) - 1;
    }
    tree_.offsets_.push_back(end);
  }

  /// Drops nodes of the unfinished generation and returns the tree.
  LabelledTree take_partial() {
    tree_.nodes_.resize(tree_.offsets_.back());
    return std::move(tree_);
  }

  LabelledTree take() { return std::move(tree_); }

 private:
  LabelledTree tree_;
  std::size_t max_nodes_;
};

}  // namespace brw
