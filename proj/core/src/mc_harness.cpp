#include "brw/mc_harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "brw/numeric.hpp"
#include "brw/parallel.hpp"
#include "brw/spine_sim.hpp"

namespace brw {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void validate_config(const McConfig& cfg) {
  if (cfg.replicates < 2) {
    throw Error(ErrorCode::invalid_argument, "replicates must be >= 2");
  }
  if (cfg.depth < 0) throw Error(ErrorCode::invalid_argument, "depth must be >= 0");
}

void require_supercritical(const OffspringLaw& law) {
  if (!law.supercritical()) {
    throw Error(ErrorCode::not_supercritical,
                "law is not supercritical (m(0) <= 1); Monte Carlo estimators refuse it");
  }
}

// Splits per-replicate values into kept values and the discard count, and
// enforces the discard budget.
McSummary summarize(std::string name, const McConfig& cfg, std::vector<double> values) {
  McSummary s;
  s.estimator = std::move(name);
  s.seed = cfg.master_seed.value;
  std::vector<double> kept;
  kept.reserve(values.size());
  for (double v : values) {
    if (std::isnan(v)) {
      ++s.discarded;
    } else {
      kept.push_back(v);
    }
  }
  if (static_cast<double>(s.discarded) >
      kMaxDiscardFraction * static_cast<double>(values.size())) {
    std::ostringstream msg;
    msg << s.estimator << ": " << s.discarded << " of " << values.size()
        << " replicates hit the node cap (limit 1%)";
    throw Error(ErrorCode::too_many_discards, msg.str());
  }
  const MeanAndError me = mean_and_error(kept);
  s.estimate = me.mean;
  s.se = me.se;
  s.n = static_cast<std::int64_t>(kept.size());
  s.values = std::move(values);
  return s;
}

bool within_band(double estimate, double reference, double se) {
  return std::fabs(estimate - reference) <= kSigmaBand * se;
}

double median(std::vector<double> xs) {
  if (xs.empty()) return kNaN;
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
  const double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  const double lo = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

McSummary mc_mean_w(const OffspringLaw& law, double alpha, const McConfig& cfg) {
  validate_config(cfg);
  require_supercritical(law);
  const TiltProfile profile = classify(law, alpha);
  const double log_m = profile.log_m;
  auto values = run_replicates(cfg.replicates, cfg.workers, [&](std::int64_t r) {
    Rng rng = make_rng(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(r)));
    try {
      const LabelledTree tree = grow_tree(law, cfg.depth, cfg.caps, rng);
      return std::exp(w_trajectory(tree, alpha, log_m).log_w.back());
    } catch (const PopulationCapError&) {
      return kNaN;
    }
  });
  McSummary s = summarize("mean_w", cfg, std::move(values));
  s.reference_value = 1.0;
  s.pass = within_band(s.estimate, 1.0, s.se);
  if (is_trivial(profile.classification)) {
    s.unreliable = true;
    s.note = "classified " + to_string(profile.classification) +
             ": E[W_n] = 1 at every n but the mean is carried by rare huge values; "
             "the sample mean typically collapses";
  }
  return s;
}

McSummary mc_spine_slope(const OffspringLaw& law, double alpha, const McConfig& cfg) {
  validate_config(cfg);
  if (cfg.depth < 1) throw Error(ErrorCode::invalid_argument, "spine slope needs depth >= 1");
  const TiltProfile profile = classify(law, alpha);
  auto values = run_replicates(cfg.replicates, cfg.workers, [&](std::int64_t r) {
    const SpinePath path = sample_spine_path(
        law, alpha, cfg.depth, derive_seed(cfg.master_seed, static_cast<std::uint64_t>(r)));
    return path.positions.back() / static_cast<double>(cfg.depth);
  });
  McSummary s = summarize("spine_slope", cfg, std::move(values));
  s.reference_value = profile.drift;
  s.pass = within_band(s.estimate, s.reference_value, s.se);
  return s;
}

McSummary mc_extinction(const OffspringLaw& law, const McConfig& cfg) {
  validate_config(cfg);
  require_supercritical(law);

  // Litter-size classes for the multinomial draw.
  std::vector<std::pair<std::int64_t, double>> classes;
  if (const FiniteLaw* f = law.finite()) {
    for (const Atom& atom : f->atoms) {
      classes.emplace_back(static_cast<std::int64_t>(atom.count()), atom.probability);
    }
  }
  constexpr std::int64_t kPopulationLimit = std::int64_t{1} << 52;

  auto values = run_replicates(cfg.replicates, cfg.workers, [&](std::int64_t r) {
    // With no empty litter the population can never die out.
    if (law.empty_probability() == 0.0) return 0.0;
    Rng rng = make_rng(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(r)));
    std::int64_t z = 1;
    for (int g = 0; g < cfg.depth && z > 0; ++g) {
      std::int64_t remaining = z;
      double rest = 1.0;
      std::int64_t next = 0;
      for (std::size_t c = 0; c < classes.size() && remaining > 0; ++c) {
        const auto [count, p] = classes[c];
        std::int64_t taken = remaining;
        if (c + 1 < classes.size()) {
          const double prob = std::clamp(p / rest, 0.0, 1.0);
          std::binomial_distribution<std::int64_t> bin(remaining, prob);
          taken = bin(rng);
        }
        next += taken * count;
        remaining -= taken;
        rest -= p;
      }
      if (next > kPopulationLimit) {
        throw Error(ErrorCode::overflow, "mc_extinction: generation size overflow");
      }
      z = next;
    }
    return z == 0 ? 1.0 : 0.0;
  });
  McSummary s = summarize("extinction", cfg, std::move(values));
  s.reference_value = pgf_iterate_from_zero(law, cfg.depth);
  s.pass = within_band(s.estimate, s.reference_value, s.se);
  if (law.empty_probability() == 0.0) s.note = "no empty litter: extinction impossible";
  return s;
}

std::string to_string(TrivialityVerdict v) {
  switch (v) {
    case TrivialityVerdict::decaying: return "DECAYING";
    case TrivialityVerdict::stable: return "STABLE";
    case TrivialityVerdict::inconclusive: return "INCONCLUSIVE";
  }
  return "UNKNOWN";
}

TrivialityReport mc_triviality_scan(const OffspringLaw& law, double alpha,
                                    const std::vector<int>& depth_grid, const McConfig& cfg) {
  validate_config(cfg);
  require_supercritical(law);
  if (law.finite() == nullptr) {
    throw Error(ErrorCode::invalid_argument, "triviality scan requires a finite law");
  }
  if (depth_grid.empty() || !std::is_sorted(depth_grid.begin(), depth_grid.end()) ||
      std::adjacent_find(depth_grid.begin(), depth_grid.end()) != depth_grid.end() ||
      depth_grid.front() < 0) {
    throw Error(ErrorCode::invalid_argument, "depth grid must be strictly increasing and >= 0");
  }
  const TiltProfile profile = classify(law, alpha);
  const double log_m = profile.log_m;
  const auto pool_size = cfg.replicates;

  TrivialityReport report;
  report.alpha = alpha;
  report.classification = profile.classification;
  report.seed = cfg.master_seed.value;
  report.pool_size = pool_size;

  std::vector<double> pool(static_cast<std::size_t>(pool_size), 0.0);
  auto record = [&](int depth) {
    std::vector<double> alive;
    double sum = 0.0;
    for (double v : pool) {
      if (v != kNegInf) {
        alive.push_back(v);
        sum += v;
      }
    }
    TrivialityPoint pt;
    pt.depth = depth;
    pt.surviving_fraction = static_cast<double>(alive.size()) / static_cast<double>(pool.size());
    pt.mean_log_w = alive.empty() ? kNaN : sum / static_cast<double>(alive.size());
    pt.median_log_w = median(std::move(alive));
    report.points.push_back(pt);
  };

  std::size_t grid_index = 0;
  const int last = depth_grid.back();
  for (int n = 0; n <= last; ++n) {
    if (n == depth_grid[grid_index]) {
      record(n);
      ++grid_index;
    }
    if (n == last) break;
    const Seed step_seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(n) + 1);
    pool = run_replicates(pool_size, cfg.workers, [&](std::int64_t j) {
      Rng rng = make_rng(derive_seed(step_seed, static_cast<std::uint64_t>(j)));
      const Draw draw = sample_draw(law, rng);
      LogSumExp acc;
      for (double x : displacements(law, draw)) {
        const auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(pool_size));
        acc.add(-alpha * x - log_m + pool[std::min(pick, pool.size() - 1)]);
      }
      return acc.value();
    });
  }

  bool empty_point = false;
  for (const auto& pt : report.points) empty_point |= std::isnan(pt.median_log_w);
  if (!empty_point) {
    const double first = report.points.front().median_log_w;
    const double final_median = report.points.back().median_log_w;
    bool monotone = true;
    bool within = true;
    for (std::size_t i = 0; i < report.points.size(); ++i) {
      if (i > 0 && report.points[i].median_log_w > report.points[i - 1].median_log_w) {
        monotone = false;
      }
      if (std::fabs(report.points[i].median_log_w - first) > kStableNats) within = false;
    }
    if (report.points.size() >= 2 && monotone && final_median - first <= -kDecayNats) {
      report.verdict = TrivialityVerdict::decaying;
    } else if (within) {
      report.verdict = TrivialityVerdict::stable;
    }
  }
  report.contradicts_classification =
      (profile.classification == Classification::nontrivial &&
       report.verdict == TrivialityVerdict::decaying) ||
      (is_trivial(profile.classification) && report.verdict == TrivialityVerdict::stable);
  return report;
}

std::string Functional::name() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::one: os << "one"; break;
    case Kind::population_equals: os << "indicator_Z_eq_" << k; break;
    case Kind::population_min: os << "min_Z_" << k; break;
    case Kind::exp_neg_max_position: os << "exp_neg_max_position_" << beta; break;
  }
  return os.str();
}

namespace {

double apply_functional(const Functional& f, std::int64_t population,
                        std::span<const double> positions) {
  using Kind = Functional::Kind;
  switch (f.kind) {
    case Kind::one: return 1.0;
    case Kind::population_equals: return population == f.k ? 1.0 : 0.0;
    case Kind::population_min: return static_cast<double>(std::min(population, f.k));
    case Kind::exp_neg_max_position: {
      if (positions.empty()) return 0.0;
      return std::exp(-f.beta * *std::max_element(positions.begin(), positions.end()));
    }
  }
  return 0.0;
}

}  // namespace

double Functional::operator()(const LabelledTree& tree, int n) const {
  std::vector<double> positions;
  for (const NodeRecord& v : tree.generation(n)) positions.push_back(v.position);
  return apply_functional(*this, static_cast<std::int64_t>(positions.size()), positions);
}

double Functional::operator()(const OutcomeTree& tree, int n) const {
  const auto& positions = tree.positions.at(static_cast<std::size_t>(n));
  return apply_functional(*this, static_cast<std::int64_t>(positions.size()), positions);
}

McSummary mc_importance_identity(const OffspringLaw& law, double alpha, const McConfig& cfg,
                                 const Functional& f) {
  validate_config(cfg);
  require_supercritical(law);
  const double log_m = classify(law, alpha).log_m;
  const int n = cfg.depth;

  auto values = run_replicates(cfg.replicates, cfg.workers, [&](std::int64_t r) {
    try {
      const SpinedTree spined = grow_spined_tree(
          law, alpha, n, cfg.caps, derive_seed(cfg.master_seed, static_cast<std::uint64_t>(r)));
      const double inv_w = std::exp(importance_weights(spined, alpha, log_m).back());
      return f(spined.tree, n) * inv_w;
    } catch (const PopulationCapError&) {
      return kNaN;
    }
  });
  McSummary s = summarize("importance_" + f.name(), cfg, std::move(values));

  if (log10_outcome_estimate(law, n, false) <= std::log10(kMaxOutcomes)) {
    s.reference_value = exact_expectation(law, n, [&](const OutcomeTree& t) { return f(t, n); });
    s.survival_reference = exact_expectation(law, n, [&](const OutcomeTree& t) {
      return t.positions.back().empty() ? 0.0 : f(t, n);
    });
    s.note = "reference: exact enumeration";
  } else {
    // Independent mu-sample on a salted stream.
    const Seed mu_master{mix64(cfg.master_seed.value ^ 0x6D752D6D63ULL)};
    struct Pair {
      double plain;
      double surviving;
    };
    auto direct = run_replicates(cfg.replicates, cfg.workers, [&](std::int64_t r) {
      Rng rng = make_rng(derive_seed(mu_master, static_cast<std::uint64_t>(r)));
      try {
        const LabelledTree tree = grow_tree(law, n, cfg.caps, rng);
        const double v = f(tree, n);
        return Pair{v, tree.generation_size(n) > 0 ? v : 0.0};
      } catch (const PopulationCapError&) {
        return Pair{kNaN, kNaN};
      }
    });
    std::vector<double> plain, surviving;
    for (const Pair& p : direct) {
      if (std::isnan(p.plain)) continue;
      plain.push_back(p.plain);
      surviving.push_back(p.surviving);
    }
    const auto me = mean_and_error(plain);
    s.reference_value = me.mean;
    s.reference_se = me.se;
    s.survival_reference = mean_and_error(surviving).mean;
    s.note = "reference: direct mu Monte Carlo";
  }
  s.pass = std::fabs(s.estimate - s.reference_value) <=
           kSigmaBand * std::sqrt(s.se * s.se + s.reference_se * s.reference_se);
  return s;
}

}  // namespace brw
