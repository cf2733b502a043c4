// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 1 for ctest).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "brw/exact_oracle.hpp"
#include "brw/law_io.hpp"
#include "brw/mc_harness.hpp"
#include "brw/offspring_model.hpp"
#include "brw_cli/cli.hpp"
#include "oracle.hpp"

using namespace brw;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;  ///< 0: no runtime bound
  std::function<Outcome()> body;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

std::vector<FiniteLaw> random_suite(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::vector<FiniteLaw> out;
  while (out.size() < n) out.push_back(oracle::random_law(g, 4, 3));
  return out;
}

McConfig mc_config(std::int64_t reps, int depth, std::uint64_t seed) {
  McConfig cfg;
  cfg.replicates = reps;
  cfg.depth = depth;
  cfg.master_seed = Seed{seed};
  cfg.workers = 0;
  return cfg;
}

Outcome exact_identities() {
  struct Item {
    std::string id;
    FiniteLaw law;
    std::vector<double> alphas;
  };
  const std::vector<Item> items{{"binary", oracle::binary(), {0.0, 1.0, -0.5}},
                                {"C", oracle::law_c(), {0.0, 1.0, -0.5}},
                                {"D", oracle::law_d(), {0.0, 1.0, -0.5, 5.0}}};
  Outcome o;
  int total = 0, passed = 0, survival_total = 0, survival_passed = 0;
  double worst = 0.0;
  std::string failures;
  for (const auto& item : items) {
    const auto law = validate_law(item.law);
    for (double alpha : item.alphas) {
      for (int depth : {1, 2}) {
        for (const auto& r : run_all_checks(law, alpha, depth, item.id)) {
          const bool ok = r.pass && r.max_discrepancy <= 1e-10;
          if (r.check == "inverse_martingale_survival") {
            ++survival_total;
            survival_passed += ok;
            continue;
          }
          ++total;
          if (ok) {
            ++passed;
            worst = std::max(worst, r.max_discrepancy);
          } else {
            o.pass = false;
            failures += " " + r.check + "(" + item.id + ",a=" + fmt(alpha) + ",n=" +
                        std::to_string(depth) + ",d=" + fmt(r.max_discrepancy) + ")";
          }
        }
      }
    }
  }
  o.detail = std::to_string(passed) + "/" + std::to_string(total) +
             " checks within 1e-10 (worst passing " + fmt(worst) + ")";
  if (!failures.empty()) o.detail += "; failed:" + failures;
  o.detail += "; survival-corrected inverse martingale " + std::to_string(survival_passed) + "/" +
              std::to_string(survival_total);
  return o;
}

Outcome normalization() {
  Outcome o;
  double worst_mass = 0.0, worst_mean = 0.0, worst_sum = 0.0;
  for (const auto& raw : random_suite(100, 2024)) {
    const auto law = validate_law(raw);
    const auto nv = oracle::from(raw);
    for (double alpha : {0.0, 1.0, -0.5}) {
      double sb = 0.0;
      const auto biased = size_biased_law(law, alpha);
      for (const auto& a : biased.finite()->atoms) sb += a.probability;
      double mass = 0.0, mean = 0.0;
      for (const auto& s : spine_step_law(law, alpha)) {
        mass += s.probability;
        mean += s.probability * s.displacement;
      }
      const double drift = static_cast<double>(-oracle::mass_derivative(nv, alpha) / oracle::mass(nv, alpha));
      worst_sum = std::max(worst_sum, std::fabs(sb - 1.0));
      worst_mass = std::max(worst_mass, std::fabs(mass - 1.0));
      worst_mean = std::max(worst_mean, std::fabs(mean - drift));
    }
  }
  o.pass = worst_sum <= 1e-12 && worst_mass <= 1e-12 && worst_mean <= 1e-12;
  o.detail = "max |sum-1| size-biased " + fmt(worst_sum) + ", step law " + fmt(worst_mass) +
             ", |mean-drift| " + fmt(worst_mean);
  return o;
}

Outcome extinction() {
  const auto raw = oracle::law_c();
  const auto law = validate_law(raw);
  const double q = extinction_probability(law);
  const double root = oracle::quadratic_extinction(0.2, 0.8);
  const double f30 = oracle::pgf_iterate(oracle::from(raw), 30);
  const auto s = mc_extinction(law, mc_config(100000, 30, 31));
  Outcome o;
  const bool q_ok = std::fabs(q - root) <= 1e-12;
  const bool ref_ok = std::fabs(s.reference_value - f30) <= 1e-14;
  const bool mc_ok = std::fabs(s.estimate - f30) <= 4 * s.se;
  o.pass = q_ok && ref_ok && mc_ok;
  o.detail = "q=" + fmt(q) + " (root " + fmt(root) + "); mc " + fmt(s.estimate) + " +- " +
             fmt(s.se) + " vs f30(0)=" + fmt(f30);
  return o;
}

Outcome martingale_mean() {
  const auto s = mc_mean_w(validate_law(oracle::law_c()), 1.0, mc_config(10000, 12, 41));
  Outcome o;
  o.pass = std::fabs(s.estimate - 1.0) <= 4 * s.se && s.discarded == 0;
  o.detail = "mean W_12 = " + fmt(s.estimate) + " +- " + fmt(s.se);
  return o;
}

Outcome spine_slope() {
  const auto law = validate_law(oracle::law_c());
  const double drift = 1.0 / (1.0 + std::exp(1.0));
  const auto s = mc_spine_slope(law, 1.0, mc_config(200, 2000, 51));
  Outcome o;
  o.pass = std::fabs(s.estimate - drift) <= 4 * s.se &&
           std::fabs(s.reference_value - drift) <= 1e-14;
  o.detail = "S_n/n = " + fmt(s.estimate) + " +- " + fmt(s.se) + " vs drift " + fmt(drift);
  return o;
}

Outcome dichotomy() {
  Outcome o;
  const auto c = mc_triviality_scan(validate_law(oracle::law_c()), 1.0, {20, 50, 100},
                                    mc_config(2000, 0, 61));
  const auto d = mc_triviality_scan(validate_law(oracle::law_d()), 5.0, {50, 200},
                                    mc_config(2000, 0, 62));
  const auto b = mc_triviality_scan(validate_law(oracle::binary()), 1.0, {10, 100},
                                    mc_config(2000, 0, 63));
  o.pass = c.verdict != TrivialityVerdict::decaying && !c.contradicts_classification &&
           d.verdict != TrivialityVerdict::stable && !d.contradicts_classification &&
           b.verdict == TrivialityVerdict::stable;
  o.detail = "C@1 " + to_string(c.verdict) + "/" + to_string(c.classification) + ", D@5 " +
             to_string(d.verdict) + "/" + to_string(d.classification) + ", binary " +
             to_string(b.verdict);
  return o;
}

Outcome importance() {
  const auto raw = oracle::law_c();
  const auto law = validate_law(raw);
  const auto nv = oracle::from(raw);
  const auto cfg = mc_config(20000, 2, 71);
  Outcome o;
  struct Case {
    Functional f;
    double exact;
  };
  const std::vector<Case> cases{
      {Functional::one(), 1.0},
      {Functional::population_equals(4),
       oracle::expectation(nv, 2, [](const oracle::Outcome& t) { return t.positions[2].size() == 4 ? 1.0 : 0.0; })},
      {Functional::population_min(2), oracle::expectation(nv, 2, [](const oracle::Outcome& t) {
         return std::min(static_cast<double>(t.positions[2].size()), 2.0);
       })},
  };
  for (const auto& c : cases) {
    const auto s = mc_importance_identity(law, 1.0, cfg, c.f);
    const bool ref_ok = std::fabs(s.reference_value - c.exact) <= 1e-12;
    const bool ok = ref_ok && s.pass;
    o.pass = o.pass && ok;
    o.detail += c.f.name() + ": " + fmt(s.estimate) + " +- " + fmt(s.se) + " vs " + fmt(c.exact) +
                (ok ? " ok" : " FAIL") + "; ";
  }
  const double p4 = cases[1].exact;
  if (std::fabs(p4 - 0.512) > 1e-12) {
    o.pass = false;
    o.detail += "oracle P[Z_2=4]=" + fmt(p4) + " != 0.512; ";
  }
  o.detail += "P_mu[Z_2>0]=" + fmt(1.0 - oracle::pgf_iterate(nv, 2));
  return o;
}

Outcome shift_invariance() {
  std::mt19937_64 g(81);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Outcome o;
  double worst_gap = 0.0, worst_w = 0.0;
  int class_mismatch = 0;
  for (const auto& raw : random_suite(50, 8)) {
    const double c = u(g);
    const double alpha = u(g);
    const auto law = validate_law(raw);
    const auto sh = validate_law(oracle::shifted(raw, c));
    const auto pa = classify(law, alpha);
    const auto pb = classify(sh, alpha);
    class_mismatch += pa.classification != pb.classification;
    worst_gap = std::max(worst_gap, std::fabs(pa.gap - pb.gap));
    const Seed seed{g()};
    Rng ra = make_rng(seed), rb = make_rng(seed);
    GrowthCaps caps;
    const auto ta = grow_tree(law, 7, caps, ra);
    const auto tb = grow_tree(sh, 7, caps, rb);
    const auto wa = w_trajectory(ta, alpha, pa.log_m);
    const auto wb = w_trajectory(tb, alpha, pb.log_m);
    if (wa.log_w.size() != wb.log_w.size()) {
      o.pass = false;
      continue;
    }
    for (std::size_t n = 0; n < wa.log_w.size(); ++n) {
      if (std::isinf(wa.log_w[n]) || std::isinf(wb.log_w[n])) {
        if (wa.log_w[n] != wb.log_w[n]) o.pass = false;
        continue;
      }
      worst_w = std::max(worst_w, std::fabs(std::exp(wa.log_w[n]) - std::exp(wb.log_w[n])));
    }
  }
  o.pass = o.pass && class_mismatch == 0 && worst_gap <= 1e-9 && worst_w <= 1e-9;
  o.detail = "classification mismatches " + std::to_string(class_mismatch) + ", max gap diff " +
             fmt(worst_gap) + ", max |W diff| " + fmt(worst_w);
  return o;
}

Outcome kahane() {
  Outcome o;
  double worst = -1e300;
  int n = 0, violations = 0, entropy_violations = 0;
  for (const auto& raw : random_suite(100, 2024)) {
    const auto law = validate_law(raw);
    for (double alpha : {0.0, 1.0}) {
      const auto k = kahane_bound_check(law, alpha);
      const double ref = static_cast<double>(oracle::llogl(oracle::from(raw), alpha));
      if (std::fabs(k.lhs - ref) > 1e-12 * std::max(1.0, ref)) o.pass = false;
      if (!k.holds || k.lhs > k.rhs + 1e-12) ++violations;
      if (!k.entropy_holds) ++entropy_violations;
      worst = std::max(worst, k.lhs - k.rhs);
      ++n;
    }
  }
  o.pass = o.pass && violations == 0;
  o.detail = std::to_string(violations) + " of " + std::to_string(n) +
             " cases violate lhs <= |m'| + log(max L) m (max lhs-rhs " + fmt(worst) +
             "); entropy form violated in " + std::to_string(entropy_violations);
  return o;
}

Outcome reproducibility() {
  const std::filesystem::path models = BRW_MODELS_DIR;
  const auto dir = std::filesystem::temp_directory_path() / "brw_acceptance";
  std::filesystem::create_directories(dir);
  const std::string c = (models / "law_c.json").string();
  const std::string d = (models / "law_d.json").string();
  const std::vector<std::vector<std::string>> runs{
      {"simulate", "--model", c, "--alpha", "1", "--depth", "10", "--reps", "50", "--seed", "1", "--format", "csv"},
      {"simulate", "--model", d, "--alpha", "5", "--depth", "6", "--reps", "20", "--seed", "2"},
      {"spine", "--model", c, "--alpha", "1", "--depth", "8", "--reps", "30", "--seed", "3", "--format", "csv"},
      {"spine", "--model", c, "--alpha", "1", "--depth", "500", "--reps", "30", "--seed", "4", "--spine-only"},
      {"mc", "--model", c, "--alpha", "1", "--depth", "12", "--reps", "2000", "--seed", "5"},
      {"mc", "--model", c, "--alpha", "1", "--depth", "12", "--reps", "2000", "--seed", "5", "--format", "csv"},
      {"mc", "--model", c, "--estimator", "extinction", "--depth", "30", "--reps", "5000", "--seed", "6"},
      {"mc", "--model", c, "--alpha", "1", "--estimator", "spine_slope", "--depth", "500", "--reps", "100", "--seed", "7"},
      {"mc", "--model", d, "--alpha", "5", "--estimator", "triviality", "--depth-grid", "10,40", "--reps", "500", "--seed", "8"},
      {"mc", "--model", c, "--alpha", "1", "--estimator", "importance", "--functional", "min:2", "--depth", "2", "--reps", "2000", "--seed", "9"},
  };
  auto read = [](const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  Outcome o;
  int identical = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::string reference;
    bool same = true;
    for (const char* workers : {"1", "2", "4", "1"}) {
      auto args = runs[i];
      const auto path = dir / ("run" + std::to_string(i) + "_w" + workers + ".out");
      args.insert(args.begin(), "brw");
      args.insert(args.end(), {"--workers", workers, "--out", path.string()});
      std::ostringstream out, err;
      const int code = cli::run(args, out, err);
      if (code != 0) {
        same = false;
        o.detail += "run " + std::to_string(i) + " exit " + std::to_string(code) + ": " + err.str();
        break;
      }
      const auto body = read(path);
      if (reference.empty()) {
        reference = body;
      } else if (body != reference) {
        same = false;
      }
    }
    identical += same;
    if (!same) o.pass = false;
  }
  std::filesystem::remove_all(dir);
  o.detail += std::to_string(identical) + "/" + std::to_string(runs.size()) +
              " runs byte-identical across workers {1,2,4} and a rerun";
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "exact identity suite", 10, exact_identities},
      {2, "normalization identities", 1, normalization},
      {3, "extinction", 30, extinction},
      {4, "martingale mean", 30, martingale_mean},
      {5, "spine slope", 60, spine_slope},
      {6, "dichotomy agreement", 60, dichotomy},
      {7, "importance identity", 30, importance},
      {8, "shift invariance", 10, shift_invariance},
      {9, "kahane bound", 1, kahane},
      {10, "reproducibility", 0, reproducibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass;
    std::string timing = fmt(secs) + " s";
    if (c.budget_s > 0) {
      timing += " / " + fmt(c.budget_s) + " s";
      if (secs > c.budget_s) pass = false;
    }
    failed += !pass;
    std::printf("criterion %2d %-26s %s  [%s]  %s\n", c.id, c.name.c_str(), pass ? "PASS" : "FAIL",
                timing.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
