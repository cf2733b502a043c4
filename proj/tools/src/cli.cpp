#include "brw_cli/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "brw/error.hpp"
#include "brw/exact_oracle.hpp"
#include "brw/law_io.hpp"
#include "brw/mc_harness.hpp"
#include "brw/numeric.hpp"
#include "brw/offspring_model.hpp"
#include "brw/parallel.hpp"
#include "brw/spine_sim.hpp"
#include "brw_cli/format.hpp"

namespace brw::cli {

namespace {

using Json = nlohmann::ordered_json;

struct RunConfig {
  std::string subcommand;
  std::string model;
  std::string alpha;
  int depth = -1;
  std::string depth_grid;
  std::int64_t reps = -1;
  std::optional<std::uint64_t> seed;
  std::size_t max_nodes = GrowthCaps{}.max_nodes;
  std::string out;
  std::string format = "json";
  unsigned workers = 1;
  std::string estimator = "mean_w";
  std::string functional = "one";
  bool spine_only = false;
};

struct Output {
  std::string body;
  int code = kOk;
};

int exit_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::too_large:
    case ErrorCode::population_cap:
    case ErrorCode::overflow:
    case ErrorCode::too_many_discards:
    case ErrorCode::not_supercritical:
    case ErrorCode::no_convergence:
    case ErrorCode::zero_mass:
      return kResource;
    default:
      return kValidation;
  }
}

[[noreturn]] void fail(const std::string& message) {
  throw Error(ErrorCode::invalid_argument, message);
}

std::string law_id_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

Functional parse_functional(const std::string& text) {
  if (text == "one") return Functional::one();
  const auto colon = text.find(':');
  if (colon == std::string::npos) fail("unknown functional '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string arg = text.substr(colon + 1);
  if (kind == "eq" || kind == "min") {
    std::int64_t k = 0;
    auto [p, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), k);
    if (ec != std::errc{} || p != arg.data() + arg.size() || k < 0) {
      fail("functional '" + text + "': expected a nonnegative integer");
    }
    return kind == "eq" ? Functional::population_equals(k) : Functional::population_min(k);
  }
  if (kind == "expmax") {
    double beta = 0.0;
    auto [p, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), beta);
    if (ec != std::errc{} || p != arg.data() + arg.size() || !(beta > 0.0) || !std::isfinite(beta)) {
      fail("functional '" + text + "': expected beta > 0");
    }
    return Functional::exp_neg_max_position(beta);
  }
  fail("unknown functional '" + text + "'");
}

// ---- classify --------------------------------------------------------------

Output run_classify(const RunConfig& cfg, const OffspringLaw& law,
                    const std::vector<double>& alphas) {
  double q = kPosInf;
  std::string q_note;
  try {
    q = extinction_probability(law);
  } catch (const NoConvergenceError& e) {
    q = e.last_iterate();
    q_note = "not converged";
  }
  std::vector<TiltProfile> profiles;
  for (double a : alphas) profiles.push_back(classify(law, a));

  std::ostringstream os;
  if (cfg.format == "csv") {
    os << "alpha,m,m_prime,drift,log_m,llogl,gap,q,classification,reason\n";
    for (const auto& p : profiles) {
      os << format_double(p.alpha) << ',' << format_double(p.m) << ','
         << format_double(p.m_prime) << ',' << format_double(p.drift) << ','
         << format_double(p.log_m) << ','
         << (std::isinf(p.llogl) ? std::string("INFINITE") : format_double(p.llogl)) << ','
         << format_double(p.gap) << ',' << format_double(q) << ','
         << to_string(p.classification) << ',' << csv_field(p.reason) << '\n';
    }
  } else {
    Json arr = Json::array();
    for (const auto& p : profiles) {
      Json j;
      j["alpha"] = p.alpha;
      j["m"] = p.m;
      j["m_prime"] = p.m_prime;
      j["drift"] = p.drift;
      j["log_m"] = p.log_m;
      if (std::isinf(p.llogl)) {
        j["llogl"] = "INFINITE";
      } else {
        j["llogl"] = p.llogl;
      }
      j["gap"] = p.gap;
      j["q"] = q;
      if (!q_note.empty()) j["q_note"] = q_note;
      j["classification"] = to_string(p.classification);
      j["reason"] = p.reason;
      arr.push_back(std::move(j));
    }
    os << arr.dump(2) << '\n';
  }
  return {os.str(), kOk};
}

// ---- verify ----------------------------------------------------------------

Output run_verify(const RunConfig& cfg, const OffspringLaw& law,
                  const std::vector<double>& alphas, std::ostream& err) {
  EnumerationReport report;
  const std::string id = law_id_of(cfg.model);
  try {
    for (double a : alphas) {
      auto part = run_all_checks(law, a, cfg.depth, id);
      report.insert(report.end(), part.begin(), part.end());
    }
  } catch (const TooLargeError& e) {
    err << "TOO_LARGE: projected outcome count 10^" << format_double(e.log10_estimate())
        << " exceeds the cap of 10^" << format_double(std::log10(kMaxOutcomes)) << '\n';
    return {"", kResource};
  }

  int code = kOk;
  for (const auto& r : report) {
    if (!r.pass) {
      code = kIdentityFailure;
      err << "identity check failed: " << r.check << " alpha=" << format_double(r.alpha)
          << " depth=" << r.depth << " discrepancy=" << format_double(r.max_discrepancy) << '\n';
    }
  }

  std::ostringstream os;
  if (cfg.format == "csv") {
    os << "check,law,alpha,depth,max_discrepancy,outcomes,pass\n";
    for (const auto& r : report) {
      os << r.check << ',' << csv_field(r.law) << ',' << format_double(r.alpha) << ','
         << r.depth << ',' << format_double(r.max_discrepancy) << ',' << r.outcomes << ','
         << (r.pass ? "true" : "false") << '\n';
    }
  } else {
    Json arr = Json::array();
    for (const auto& r : report) {
      arr.push_back(Json{{"check", r.check},
                         {"law", r.law},
                         {"alpha", r.alpha},
                         {"depth", r.depth},
                         {"max_discrepancy", r.max_discrepancy},
                         {"outcomes", r.outcomes},
                         {"pass", r.pass}});
    }
    os << arr.dump(2) << '\n';
  }
  return {os.str(), code};
}

// ---- simulate --------------------------------------------------------------

struct SimResult {
  WTrajectory traj;
  bool capped = false;
};

Output run_simulate(const RunConfig& cfg, const OffspringLaw& law, double alpha,
                    std::ostream& err) {
  const double log_m = log_tilted_mass(law, alpha);
  const GrowthCaps caps{cfg.max_nodes, GrowthCaps{}.max_depth};
  const Seed master{*cfg.seed};
  auto results = run_replicates(cfg.reps, cfg.workers, [&](std::int64_t r) {
    Rng rng = make_rng(derive_seed(master, static_cast<std::uint64_t>(r)));
    try {
      return SimResult{w_trajectory(grow_tree(law, cfg.depth, caps, rng), alpha, log_m), false};
    } catch (const PopulationCapError& e) {
      return SimResult{w_trajectory(e.partial(), alpha, log_m), true};
    }
  });

  std::vector<std::int64_t> capped;
  for (std::size_t r = 0; r < results.size(); ++r) {
    if (results[r].capped) capped.push_back(static_cast<std::int64_t>(r));
  }

  std::ostringstream os;
  if (cfg.format == "csv") {
    os << "replicate,n,Z_n,log_w\n";
    for (std::size_t r = 0; r < results.size(); ++r) {
      const auto& t = results[r].traj;
      for (std::size_t n = 0; n < t.log_w.size(); ++n) {
        os << r << ',' << n << ',' << t.population[n] << ',' << format_double(t.log_w[n]) << '\n';
      }
    }
  } else {
    Json reps = Json::array();
    for (std::size_t r = 0; r < results.size(); ++r) {
      const auto& t = results[r].traj;
      Json rows = Json::array();
      for (std::size_t n = 0; n < t.log_w.size(); ++n) {
        rows.push_back(Json{{"n", n}, {"Z_n", t.population[n]}, {"log_w", t.log_w[n]}});
      }
      reps.push_back(Json{{"replicate", r}, {"capped", results[r].capped}, {"rows", rows}});
    }
    Json doc{{"alpha", alpha},      {"log_m", log_m},     {"depth", cfg.depth},
             {"seed", *cfg.seed},   {"max_nodes", cfg.max_nodes}, {"replicates", reps}};
    os << doc.dump(2) << '\n';
  }

  int code = kOk;
  if (!capped.empty()) {
    code = kResource;
    err << "node cap " << cfg.max_nodes << " reached; rows stop at the last complete generation for replicates:";
    for (auto r : capped) err << ' ' << r;
    err << '\n';
  }
  return {os.str(), code};
}

// ---- spine -----------------------------------------------------------------

struct SpineResult {
  SpinePath path;
  std::vector<double> log_w;  ///< complete generations only
  bool capped = false;
};

Output run_spine(const RunConfig& cfg, const OffspringLaw& law, double alpha, std::ostream& err) {
  const GrowthCaps caps{cfg.max_nodes, GrowthCaps{}.max_depth};
  const Seed master{*cfg.seed};
  auto results = run_replicates(cfg.reps, cfg.workers, [&](std::int64_t r) {
    const Seed seed = derive_seed(master, static_cast<std::uint64_t>(r));
    SpineResult out;
    if (cfg.spine_only) {
      out.path = sample_spine_path(law, alpha, cfg.depth, seed);
      return out;
    }
    try {
      const SpinedTree spined = grow_spined_tree(law, alpha, cfg.depth, caps, seed);
      out.path.positions = spine_positions(spined);
      out.path.log_weights = spined.spine_log_weight;
      out.log_w = w_trajectory(spined.tree, alpha, spined.log_m).log_w;
    } catch (const SpinePopulationCapError& e) {
      out.path = e.path();
      out.log_w = w_trajectory(e.partial(), alpha, e.path().log_m).log_w;
      out.capped = true;
    }
    return out;
  });

  std::vector<std::int64_t> capped;
  for (std::size_t r = 0; r < results.size(); ++r) {
    if (results[r].capped) capped.push_back(static_cast<std::int64_t>(r));
  }

  std::ostringstream os;
  if (cfg.format == "csv") {
    os << "k,S,spine_log_weight,log_w,replicate\n";
    for (std::size_t r = 0; r < results.size(); ++r) {
      const auto& res = results[r];
      for (std::size_t k = 0; k < res.path.positions.size(); ++k) {
        os << k << ',' << format_double(res.path.positions[k]) << ','
           << format_double(res.path.log_weights[k]) << ',';
        if (k < res.log_w.size()) os << format_double(res.log_w[k]);
        os << ',' << r << '\n';
      }
    }
  } else {
    Json reps = Json::array();
    for (std::size_t r = 0; r < results.size(); ++r) {
      const auto& res = results[r];
      Json rows = Json::array();
      for (std::size_t k = 0; k < res.path.positions.size(); ++k) {
        Json row{{"k", k},
                 {"S", res.path.positions[k]},
                 {"spine_log_weight", res.path.log_weights[k]}};
        if (k < res.log_w.size()) row["log_w"] = res.log_w[k];
        rows.push_back(std::move(row));
      }
      reps.push_back(Json{{"replicate", r}, {"capped", res.capped}, {"rows", rows}});
    }
    Json doc{{"alpha", alpha},    {"depth", cfg.depth},   {"seed", *cfg.seed},
             {"spine_only", cfg.spine_only}, {"max_nodes", cfg.max_nodes}, {"replicates", reps}};
    os << doc.dump(2) << '\n';
  }

  int code = kOk;
  if (!capped.empty()) {
    code = kResource;
    err << "node cap " << cfg.max_nodes
        << " reached; log_w stops at the last complete generation for replicates:";
    for (auto r : capped) err << ' ' << r;
    err << '\n';
  }
  return {os.str(), code};
}

// ---- mc --------------------------------------------------------------------

Json summary_json(const McSummary& s, double alpha, int depth, std::int64_t reps) {
  Json j{{"estimator", s.estimator},
         {"estimate", s.estimate},
         {"se", s.se},
         {"n", s.n},
         {"discarded", s.discarded},
         {"seed", s.seed},
         {"reference_value", s.reference_value},
         {"pass", s.pass}};
  j["reference_se"] = s.reference_se;
  j["alpha"] = alpha;
  j["depth"] = depth;
  j["replicates"] = reps;
  j["unreliable"] = s.unreliable;
  if (!std::isnan(s.survival_reference)) j["survival_reference"] = s.survival_reference;
  if (!s.note.empty()) j["note"] = s.note;
  return j;
}

Output run_mc(const RunConfig& cfg, const OffspringLaw& law, double alpha) {
  McConfig mc;
  mc.replicates = cfg.reps;
  mc.depth = std::max(cfg.depth, 0);
  mc.master_seed = Seed{*cfg.seed};
  mc.caps = GrowthCaps{cfg.max_nodes, GrowthCaps{}.max_depth};
  mc.workers = cfg.workers;

  std::ostringstream os;
  if (cfg.estimator == "triviality") {
    const auto grid = parse_int_list(cfg.depth_grid);
    const TrivialityReport rep = mc_triviality_scan(law, alpha, grid, mc);
    if (cfg.format == "csv") {
      os << "depth,surviving_fraction,median_log_w,mean_log_w\n";
      for (const auto& p : rep.points) {
        os << p.depth << ',' << format_double(p.surviving_fraction) << ','
           << format_double(p.median_log_w) << ',' << format_double(p.mean_log_w) << '\n';
      }
    } else {
      Json pts = Json::array();
      for (const auto& p : rep.points) {
        pts.push_back(Json{{"depth", p.depth},
                           {"surviving_fraction", p.surviving_fraction},
                           {"median_log_w", p.median_log_w},
                           {"mean_log_w", p.mean_log_w}});
      }
      Json doc{{"estimator", "triviality"},
               {"alpha", rep.alpha},
               {"seed", rep.seed},
               {"pool_size", rep.pool_size},
               {"verdict", to_string(rep.verdict)},
               {"classification", to_string(rep.classification)},
               {"contradicts_classification", rep.contradicts_classification},
               {"points", pts}};
      os << doc.dump(2) << '\n';
    }
    return {os.str(), kOk};
  }

  McSummary s;
  if (cfg.estimator == "mean_w") {
    s = mc_mean_w(law, alpha, mc);
  } else if (cfg.estimator == "extinction") {
    s = mc_extinction(law, mc);
  } else if (cfg.estimator == "spine_slope") {
    s = mc_spine_slope(law, alpha, mc);
  } else {
    s = mc_importance_identity(law, alpha, mc, parse_functional(cfg.functional));
  }

  if (cfg.format == "csv") {
    os << "replicate,value\n";
    for (std::size_t r = 0; r < s.values.size(); ++r) {
      os << r << ',';
      if (!std::isnan(s.values[r])) os << format_double(s.values[r]);
      os << '\n';
    }
  } else {
    os << summary_json(s, alpha, cfg.depth, cfg.reps).dump(2) << '\n';
  }
  return {os.str(), kOk};
}

// ---- driver ----------------------------------------------------------------

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--model", cfg.model, "model JSON file")->required();
  sub->add_option("--format", cfg.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--out", cfg.out, "output path (default stdout)");
}

void add_alpha(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--alpha", cfg.alpha, "comma list or lin:START:STOP:COUNT");
}

void add_sim(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--depth", cfg.depth, "generations");
  sub->add_option("--reps", cfg.reps, "replicates");
  sub->add_option("--seed", cfg.seed, "master seed (required)");
  sub->add_option("--max-nodes", cfg.max_nodes, "node cap per tree");
  sub->add_option("--workers", cfg.workers, "worker threads (0: all cores)");
}

void validate(const RunConfig& cfg, std::vector<double>& alphas) {
  const std::string& sc = cfg.subcommand;
  const bool needs_alpha = !(sc == "mc" && cfg.estimator == "extinction");
  if (needs_alpha) {
    if (cfg.alpha.empty()) fail(sc + ": --alpha is required");
    alphas = parse_alpha_list(cfg.alpha);
  } else if (!cfg.alpha.empty()) {
    alphas = parse_alpha_list(cfg.alpha);
  }
  if (sc == "classify") return;

  const bool grid_mode = sc == "mc" && cfg.estimator == "triviality";
  if (grid_mode) {
    if (cfg.depth_grid.empty()) fail("mc triviality: --depth-grid is required");
    parse_int_list(cfg.depth_grid);
  } else if (cfg.depth < 0) {
    fail(sc + ": --depth N (N >= 0) is required");
  }
  if (sc == "verify") return;

  if (!cfg.seed) fail(sc + ": --seed is required");
  if (sc == "mc" && cfg.reps < 0) fail("mc: --reps is required");
  if (cfg.reps == 0 || cfg.reps < -1) fail(sc + ": --reps must be positive");
  if (alphas.size() > 1) fail(sc + ": expects a single alpha");
  if (cfg.max_nodes == 0) fail(sc + ": --max-nodes must be positive");
}

}  // namespace

std::vector<double> parse_alpha_list(const std::string& text) {
  auto parse_one = [&](std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) {
      throw Error(ErrorCode::parse, "alpha list '" + text + "': bad number '" + std::string(s) + "'");
    }
    return v;
  };
  std::vector<std::string_view> parts;
  std::string_view rest = text;
  const bool linspace = rest.starts_with("lin:");
  if (linspace) rest.remove_prefix(4);
  const char sep = linspace ? ':' : ',';
  while (true) {
    const auto pos = rest.find(sep);
    parts.push_back(rest.substr(0, pos));
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + 1);
  }
  std::vector<double> out;
  if (linspace) {
    if (parts.size() != 3) {
      throw Error(ErrorCode::parse, "alpha grid '" + text + "': expected lin:START:STOP:COUNT");
    }
    const double a = parse_one(parts[0]);
    const double b = parse_one(parts[1]);
    int count = 0;
    auto [p, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), count);
    if (ec != std::errc{} || p != parts[2].data() + parts[2].size() || count < 1) {
      throw Error(ErrorCode::parse, "alpha grid '" + text + "': COUNT must be a positive integer");
    }
    if (count == 1) return {a};
    for (int i = 0; i < count; ++i) {
      out.push_back(i == count - 1 ? b : a + (b - a) * i / (count - 1));
    }
    return out;
  }
  for (auto s : parts) out.push_back(parse_one(s));
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::string_view rest = text;
  while (true) {
    const auto pos = rest.find(',');
    const std::string_view s = rest.substr(0, pos);
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size() || v < 0) {
      throw Error(ErrorCode::parse, "integer list '" + text + "': bad entry '" + std::string(s) + "'");
    }
    out.push_back(v);
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + 1);
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Branching random walk toolkit"};
  app.require_subcommand(1);

  auto* classify_cmd = app.add_subcommand("classify", "tilt profile and classification per alpha");
  add_common(classify_cmd, cfg);
  add_alpha(classify_cmd, cfg);

  auto* verify_cmd = app.add_subcommand("verify", "exact identity checks by enumeration");
  add_common(verify_cmd, cfg);
  add_alpha(verify_cmd, cfg);
  verify_cmd->add_option("--depth", cfg.depth, "enumeration depth");

  auto* simulate_cmd = app.add_subcommand("simulate", "grow trees and write W trajectories");
  add_common(simulate_cmd, cfg);
  add_alpha(simulate_cmd, cfg);
  add_sim(simulate_cmd, cfg);

  auto* spine_cmd = app.add_subcommand("spine", "sample spined trees");
  add_common(spine_cmd, cfg);
  add_alpha(spine_cmd, cfg);
  add_sim(spine_cmd, cfg);
  spine_cmd->add_flag("--spine-only", cfg.spine_only, "sample the ray without the tree");

  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo estimators");
  add_common(mc_cmd, cfg);
  add_alpha(mc_cmd, cfg);
  add_sim(mc_cmd, cfg);
  mc_cmd->add_option("--depth-grid", cfg.depth_grid, "depths for the triviality scan");
  mc_cmd->add_option("--estimator", cfg.estimator, "mean_w|extinction|spine_slope|triviality|importance")
      ->check(CLI::IsMember({"mean_w", "extinction", "spine_slope", "triviality", "importance"}));
  mc_cmd->add_option("--functional", cfg.functional, "one | eq:K | min:K | expmax:BETA");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kValidation;
  }
  for (auto* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();

  try {
    std::vector<double> alphas;
    validate(cfg, alphas);
    if (cfg.subcommand == "mc" && cfg.estimator == "importance") parse_functional(cfg.functional);
    if (cfg.subcommand == "simulate" || cfg.subcommand == "spine") {
      if (cfg.reps < 0) cfg.reps = 1;
    }

    const OffspringLaw law = validate_law(load_law_file(cfg.model));

    Output result;
    const double alpha = alphas.empty() ? 0.0 : alphas.front();
    if (cfg.subcommand == "classify") {
      result = run_classify(cfg, law, alphas);
    } else if (cfg.subcommand == "verify") {
      result = run_verify(cfg, law, alphas, err);
    } else if (cfg.subcommand == "simulate") {
      result = run_simulate(cfg, law, alpha, err);
    } else if (cfg.subcommand == "spine") {
      result = run_spine(cfg, law, alpha, err);
    } else {
      result = run_mc(cfg, law, alpha);
    }

    if (cfg.out.empty()) {
      out << result.body;
    } else if (!result.body.empty()) {
      std::ofstream f(cfg.out, std::ios::binary);
      f << result.body;
      if (!f) throw Error(ErrorCode::io, "cannot write " + cfg.out);
    }
    return result.code;
  } catch (const Error& e) {
    err << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
}

}  // namespace brw::cli
