#include <benchmark/benchmark.h>

#include <cmath>

#include "brw/brw_sim.hpp"
#include "brw/exact_oracle.hpp"
#include "brw/mc_harness.hpp"
#include "brw/spine_sim.hpp"

namespace {

brw::OffspringLaw law_c() {
  return brw::validate_law(brw::FiniteLaw{{{0.2, {}}, {0.8, {0.0, 1.0}}}});
}

brw::OffspringLaw law_d() {
  return brw::validate_law(brw::FiniteLaw{{{0.5, {0.0, 1.0, 1.0, 1.0}}, {0.5, {1.0, 1.0}}}});
}

void BM_GrowTree(benchmark::State& state) {
  const auto law = law_d();
  const int depth = static_cast<int>(state.range(0));
  std::uint64_t i = 0;
  std::size_t nodes = 0;
  for (auto _ : state) {
    brw::Rng rng = brw::make_rng(brw::Seed{i++});
    const auto tree = brw::grow_tree(law, depth, {}, rng);
    nodes += tree.size();
    benchmark::DoNotOptimize(tree.size());
  }
  state.counters["nodes/s"] = benchmark::Counter(static_cast<double>(nodes), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_GrowTree)->Arg(6)->Arg(9);

void BM_WTrajectory(benchmark::State& state) {
  const auto law = law_d();
  brw::Rng rng = brw::make_rng(brw::Seed{1});
  const auto tree = brw::grow_tree(law, 9, {}, rng);
  const double log_m = brw::log_tilted_mass(law, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(brw::w_trajectory(tree, 1.0, log_m).log_w.back());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * tree.size()));
}
BENCHMARK(BM_WTrajectory);

void BM_SpinePath(benchmark::State& state) {
  const auto law = law_c();
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(brw::sample_spine_path(law, 1.0, 2000, brw::Seed{i++}).positions.back());
  }
}
BENCHMARK(BM_SpinePath);

void BM_SpinedTree(benchmark::State& state) {
  const auto law = law_c();
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(brw::grow_spined_tree(law, 1.0, 12, {}, brw::Seed{i++}).tree.size());
  }
}
BENCHMARK(BM_SpinedTree);

void BM_EnumerationChecks(benchmark::State& state) {
  const auto law = law_d();
  for (auto _ : state) {
    benchmark::DoNotOptimize(brw::run_all_checks(law, 1.0, 2).size());
  }
}
BENCHMARK(BM_EnumerationChecks);

void BM_ExtinctionCounts(benchmark::State& state) {
  const auto law = law_c();
  brw::McConfig cfg;
  cfg.replicates = 10000;
  cfg.depth = 30;
  cfg.workers = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(brw::mc_extinction(law, cfg).estimate);
  }
}
BENCHMARK(BM_ExtinctionCounts)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
