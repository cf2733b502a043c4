#include <doctest.h>

#include <cmath>

#include "brw/brw_sim.hpp"
#include "brw/numeric.hpp"
#include "oracle.hpp"

using namespace brw;

TEST_CASE("binary law grows the complete binary tree") {
  const auto law = validate_law(oracle::binary());
  Rng rng = make_rng(Seed{1});
  const auto tree = grow_tree(law, 3, {}, rng);
  CHECK(tree.size() == 15);
  CHECK(generation_sizes(tree) == std::vector<std::int64_t>{1, 2, 4, 8});
  for (const auto& v : tree.nodes()) CHECK(v.position == 0.0);
  CHECK_FALSE(tree.extinct_at());
  const auto traj = w_trajectory(tree, 4.2, std::log(2.0));
  for (double lw : traj.log_w) CHECK(lw == 0.0);
}

TEST_CASE("tree structure invariants") {
  const auto law = validate_law(oracle::law_d());
  Rng rng = make_rng(Seed{9});
  const auto tree = grow_tree(law, 6, {}, rng);
  const auto& root = tree.node(0);
  CHECK(root.parent == kNoParent);
  CHECK(root.position == 0.0);
  CHECK(root.generation == 0);
  std::size_t counted = 1;
  for (int n = 1; n <= tree.depth_grown(); ++n) {
    for (NodeIndex i = tree.generation_begin(n); i < tree.generation_end(n); ++i) {
      const auto& v = tree.node(i);
      CHECK(v.generation == n);
      CHECK(tree.node(v.parent).generation == n - 1);
      // recompute the position from the root path
      double s = 0.0;
      for (NodeIndex u = i; u != 0; u = tree.node(u).parent) s += tree.node(u).displacement;
      CHECK(v.position == doctest::Approx(s).epsilon(1e-15));
      ++counted;
    }
  }
  CHECK(counted == tree.size());
}

TEST_CASE("seed determinism") {
  const auto law = validate_law(oracle::law_c());
  Rng a = make_rng(Seed{123});
  Rng b = make_rng(Seed{123});
  const auto ta = grow_tree(law, 10, {}, a);
  const auto tb = grow_tree(law, 10, {}, b);
  REQUIRE(ta.size() == tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    CHECK(ta.nodes()[i].parent == tb.nodes()[i].parent);
    CHECK(ta.nodes()[i].position == tb.nodes()[i].position);
  }
}

TEST_CASE("extinction and trailing -inf") {
  const auto law = validate_law(oracle::critical());
  bool saw_extinct = false;
  for (std::uint64_t s = 0; s < 50 && !saw_extinct; ++s) {
    Rng rng = make_rng(Seed{s});
    const auto tree = grow_tree(law, 8, {}, rng);
    if (!tree.extinct_at()) continue;
    saw_extinct = true;
    const int e = *tree.extinct_at();
    CHECK(e <= 8);
    const auto z = generation_sizes(tree);
    const auto traj = w_trajectory(tree, 1.0, 0.0);
    CHECK(traj.log_w.size() == 9);
    for (int n = e; n <= 8; ++n) {
      CHECK(z[static_cast<std::size_t>(n)] == 0);
      CHECK(traj.log_w[static_cast<std::size_t>(n)] == kNegInf);
    }
  }
  CHECK(saw_extinct);
}

TEST_CASE("population cap carries partial tree") {
  const auto law = validate_law(oracle::binary());
  Rng rng = make_rng(Seed{1});
  try {
    grow_tree(law, 20, GrowthCaps{1000, 100}, rng);
    FAIL("expected cap");
  } catch (const PopulationCapError& e) {
    CHECK(e.code() == ErrorCode::population_cap);
    CHECK(e.generation_reached() == 8);
    CHECK(e.partial().depth_grown() == 8);
    CHECK(e.partial().size() == 511);
  }
  Rng rng2 = make_rng(Seed{1});
  CHECK_THROWS_AS(grow_tree(law, 200, GrowthCaps{1000, 100}, rng2), Error);
}

TEST_CASE("shift equivariance under the same seed") {
  std::mt19937_64 g(17);
  for (int i = 0; i < 20; ++i) {
    const auto raw = oracle::random_law(g);
    const double c = 0.37;
    const auto law = validate_law(raw);
    const auto sh = validate_law(oracle::shifted(raw, c));
    Rng a = make_rng(Seed{static_cast<std::uint64_t>(i)});
    Rng b = make_rng(Seed{static_cast<std::uint64_t>(i)});
    const auto ta = grow_tree(law, 6, {}, a);
    const auto tb = grow_tree(sh, 6, {}, b);
    REQUIRE(ta.size() == tb.size());
    for (std::size_t k = 0; k < ta.size(); ++k) {
      const auto& u = ta.nodes()[k];
      const auto& v = tb.nodes()[k];
      CHECK(u.parent == v.parent);
      CHECK(v.position == doctest::Approx(u.position + c * u.generation).epsilon(1e-12));
    }
    const double alpha = 0.8;
    const auto wa = w_trajectory(ta, alpha, log_tilted_mass(law, alpha));
    const auto wb = w_trajectory(tb, alpha, log_tilted_mass(sh, alpha));
    for (std::size_t n = 0; n < wa.log_w.size(); ++n) {
      if (std::isinf(wa.log_w[n])) {
        CHECK(wb.log_w[n] == wa.log_w[n]);
      } else {
        CHECK(std::fabs(wa.log_w[n] - wb.log_w[n]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("law C extinction frequency by generation 12") {
  const auto law = validate_law(oracle::law_c());
  const int reps = 10000;
  int extinct = 0;
  double z1 = 0.0;
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_rng(derive_seed(Seed{77}, static_cast<std::uint64_t>(r)));
    const auto tree = grow_tree(law, 12, {}, rng);
    extinct += tree.generation_size(12) == 0;
    z1 += static_cast<double>(tree.generation_size(1));
  }
  const double p = oracle::pgf_iterate(oracle::from(oracle::law_c()), 12);
  CHECK(std::fabs(extinct / double(reps) - p) <= 4 * std::sqrt(p * (1 - p) / reps));
  // Z_1 in {0, 2}: variance 4 * 0.8 * 0.2
  CHECK(std::fabs(z1 / reps - 1.6) <= 4 * std::sqrt(0.64 / reps));
}

TEST_CASE("depth-1 outcome frequencies match enumeration") {
  const auto raw = oracle::law_d();
  const auto law = validate_law(raw);
  const int reps = 100000;
  int four = 0;
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_rng(derive_seed(Seed{5}, static_cast<std::uint64_t>(r)));
    four += grow_tree(law, 1, {}, rng).generation_size(1) == 4;
  }
  for (const auto& o : oracle::enumerate(oracle::from(raw), 1)) {
    if (o.positions[1].size() != 4) continue;
    const double p = o.probability;
    CHECK(std::fabs(four / double(reps) - p) <= 4 * std::sqrt(p * (1 - p) / reps));
  }
}
