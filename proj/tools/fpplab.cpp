#include <algorithm>
#include <filesystem>
#include <map>

#include "CLI11.hpp"
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fpp/certifier.hpp"
#include "fpp/combinatorics.hpp"
#include "fpp/distributions.hpp"
#include "fpp/error.hpp"
#include "fpp/estimators.hpp"
#include "report.hpp"

namespace {

using fpp::report::Json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitGate = 2;
constexpr const char* kOutDirEnv = "FPPLAB_OUT_DIR";

struct GateFailure {
  std::string gate;
  std::string detail;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// `key = value` lines become --key=value arguments placed before the user's own flags (last value wins).
std::vector<std::string> config_arguments(const std::string& path, CLI::App* sub) {
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  std::vector<std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw CLI::ParseError("config line " + std::to_string(lineno) + ": expected key = value", kExitUsage);
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key == "config") continue;
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt) throw CLI::ParseError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'", kExitUsage);
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1") out.push_back("--" + key);
    } else {
      out.push_back("--" + key + "=" + value);
    }
  }
  return out;
}

std::map<std::string, std::string> snapshot(const CLI::App* sub) {
  std::map<std::string, std::string> cfg;
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config" || name == "out") continue;
    if (opt->count() > 0) {
      std::string joined;
      for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
      if (opt->get_expected_max() == 0 && joined.empty()) joined = "true";
      cfg[name] = joined;
    } else {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

struct Run {
  std::string command;
  std::filesystem::path out_dir;
  fpp::report::Manifest manifest;

  std::string prefix() const { return command + "-" + manifest.hash(); }

  void emit(const std::string& suffix, const std::string& text) {
    const auto path = fpp::report::write_file(out_dir, prefix() + suffix, text);
    manifest.outputs.push_back(path.filename().string());
  }

  void emit_json(Json j) {
    j["manifest_hash"] = manifest.hash();
    const std::string text = j.dump(2) + "\n";
    emit(".json", text);
    std::cout << text;
  }

  // CSV files open with a comment line citing the manifest
  void emit_csv(const std::string& suffix, const std::string& header_and_rows, bool echo) {
    emit(suffix, "# manifest_hash=" + manifest.hash() + "\n" + header_and_rows);
    if (echo) std::cout << header_and_rows;
  }

  void finish() {
    manifest.finished = fpp::report::utc_now();
    const auto path = fpp::report::write_file(out_dir, prefix() + ".manifest.json", manifest.to_json().dump(2) + "\n");
    std::cerr << "manifest: " << path.string() << "\n";
  }
};

struct Options {
  // shared
  std::string dist = "exponential:1.0";
  std::int64_t d = 0;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string out;
  std::string config;
  // simulation
  std::optional<std::int64_t> n;
  int replicas = 100;
  std::uint64_t max_settled = 5'000'000;
  std::optional<double> max_time;
  std::int64_t box_margin = 20;
  bool no_box = false;
  bool point = false;
  // certifier
  std::string pipeline = "automatic";
  std::optional<double> delta;
  std::vector<double> eta;
  std::optional<double> B;
  std::optional<double> mustar_delta;
  int delta_points = 99;
  int B_points = 61;
  int lower_delta_points = 999;
  bool no_refine = false;
  std::string verdict = "ball_excluded";
  std::int64_t start = 2;
  std::int64_t limit = 10'000'000;
  int spot_checks = 20;
  // combinatorics
  int walk_n = 0;
  int walk_d = 0;
  int p = 0;
  std::uint64_t samples = 0;
  double budget = 0.0;
};

fpp::Pipeline parse_pipeline(const std::string& s) {
  if (s == "automatic") return fpp::Pipeline::automatic;
  if (s == "exponential") return fpp::Pipeline::exponential;
  if (s == "generic") return fpp::Pipeline::generic;
  throw fpp::Error("usage", "unknown pipeline '" + s + "'");
}

fpp::GridSpec grid_of(const Options& o) {
  fpp::GridSpec g;
  g.delta_points = o.delta_points;
  g.B_points = o.B_points;
  g.lower_delta_points = o.lower_delta_points;
  if (!o.eta.empty()) g.etas = o.eta;
  g.refine = !o.no_refine;
  g.workers = o.workers;
  return g;
}

fpp::EstimatorOptions estimator_options(const Options& o) {
  fpp::EstimatorOptions e;
  e.caps.max_settled = o.max_settled;
  e.caps.max_time = o.max_time;
  e.workers = o.workers;
  if (o.no_box) {
    e.box_margin.reset();
  } else {
    e.box_margin = o.box_margin;
  }
  return e;
}

void run_estimate(Run& run, const Options& o, const fpp::EstimateRecord& rec) {
  const auto eo = estimator_options(o);
  run.emit_csv(".csv", std::string(fpp::report::kEstimatesHeader) + "\n" + fpp::report::estimates_row(rec) + "\n", true);
  run.emit_csv(".samples.csv",
               std::string(fpp::report::kSamplesHeader) + "\n" + fpp::report::samples_rows(rec, eo.caps, eo.box_margin),
               false);
  for (const auto& f : rec.flags()) std::cerr << "flag: " << f << "\n";
}

Json tuple_json(std::int64_t d, double delta, double eta, double B, const fpp::DistributionSpec& spec,
                fpp::Pipeline pl, std::optional<GateFailure>& failure) {
  const auto A = fpp::admissible_A(d, delta, eta, spec, pl);
  auto bp = fpp::make_bound_params(d, delta, eta, B, spec);
  bp.A = A.A;
  for (const auto& v : A.validity) bp.validity.push_back(v);
  Json j{{"params", fpp::report::to_json(bp)}, {"admissible_A", fpp::report::to_json(A)}};
  if (!bp.valid()) {
    failure = GateFailure{fpp::first_failed(bp.validity), "tuple not admissible"};
    j["admissible"] = false;
    return j;
  }
  try {
    j["terms"] = fpp::report::to_json(fpp::upsilon(bp, spec, pl));
    j["admissible"] = true;
  } catch (const fpp::Error& e) {
    failure = GateFailure{e.code(), e.what()};
    j["admissible"] = false;
  }
  return j;
}

int dispatch(const std::string& cmd, Options& o, Run& run) {
  const auto spec_needed = cmd != "saw" && cmd != "rw-overlap" && cmd != "alpha-star";
  std::optional<fpp::DistributionSpec> spec;
  if (spec_needed) spec = fpp::DistributionSpec::parse(o.dist);
  std::optional<GateFailure> failure;

  if (cmd == "simulate-mu") {
    const std::int64_t n = o.n.value_or(fpp::default_mu_n(static_cast<std::uint32_t>(o.d)));
    const auto d = static_cast<std::uint32_t>(o.d);
    const auto rec = o.point ? fpp::estimate_mu_e1_point(d, *spec, n, o.replicas, o.seed, estimator_options(o))
                             : fpp::estimate_mu_e1(d, *spec, n, o.replicas, o.seed, estimator_options(o));
    run_estimate(run, o, rec);
  } else if (cmd == "simulate-mustar") {
    const std::int64_t n = o.n.value_or(fpp::kDefaultMuStarN);
    run_estimate(run, o, fpp::estimate_mu_star(static_cast<std::uint32_t>(o.d), *spec, n, o.replicas, o.seed,
                                               estimator_options(o)));
  } else if (cmd == "slab") {
    run_estimate(run, o,
                 fpp::estimate_slab_mean(static_cast<std::uint32_t>(o.d), *spec, o.replicas, o.seed, estimator_options(o)));
  } else if (cmd == "greedy-diag") {
    const std::int64_t n = o.n.value_or(fpp::kDefaultMuStarN);
    run_estimate(run, o,
                 fpp::greedy_diagonal_bound(static_cast<std::uint32_t>(o.d), *spec, n, o.replicas, o.seed, o.workers));
  } else if (cmd == "certify-upper") {
    const auto pl = parse_pipeline(o.pipeline);
    Json j{{"schema", fpp::report::kCertificateSchema}, {"tool_version", fpp::report::tool_version()}, {"d", o.d},
           {"spec", spec->id()}};
    if (o.delta || o.B) {
      if (!o.delta || !o.B) throw fpp::Error("usage", "a fixed tuple needs both --delta and --B");
      const double eta = o.eta.empty() ? 1e-3 : o.eta.front();
      j["tuple"] = tuple_json(o.d, *o.delta, eta, *o.B, *spec, pl, failure);
    } else {
      const auto grid = grid_of(o);
      j["grid_spec"] = fpp::report::to_json(grid);
      j["upper"] = fpp::report::to_json(fpp::optimize_upper(o.d, *spec, grid, pl));
    }
    run.emit_json(j);
  } else if (cmd == "certify-lower") {
    const auto pl = parse_pipeline(o.pipeline);
    fpp::ShapeOptions so;
    so.grid = grid_of(o);
    so.pipeline = pl;
    so.lower_delta = o.delta;
    so.mustar_delta = o.mustar_delta;
    so.compute_upper = false;
    const auto cert = fpp::shape_certificate(o.d, *spec, so);
    Json j{{"schema", fpp::report::kCertificateSchema}, {"tool_version", fpp::report::tool_version()}, {"d", o.d},
           {"spec", spec->id()}, {"pipeline", fpp::pipeline_name(cert.pipeline)}};
    j["mu_lower"] = fpp::report::to_json(*cert.lower);
    const auto ms = [&] {
      if (o.mustar_delta) return fpp::mu_star_lower(o.d, *spec, *o.mustar_delta, pl);
      fpp::ShapeOptions s2 = so;
      s2.compute_upper = true;
      s2.grid.delta_points = 1;
      s2.grid.B_points = 1;
      s2.grid.refine = false;
      return *fpp::shape_certificate(o.d, *spec, s2).mustar;
    }();
    j["mustar_lower"] = fpp::report::to_json(ms);
    j["diamond_strict"] = cert.diamond_strict;
    j["mustar_upper"] = cert.mustar_upper;
    run.emit_json(j);
    if (!cert.lower->valid) failure = GateFailure{fpp::first_failed(cert.lower->preconditions), "mu(e_1) lower bound"};
  } else if (cmd == "certify-shape") {
    fpp::ShapeOptions so;
    so.grid = grid_of(o);
    so.pipeline = parse_pipeline(o.pipeline);
    so.mustar_delta = o.mustar_delta;
    const auto cert = fpp::shape_certificate(o.d, *spec, so);
    Json j = fpp::report::to_json(cert);
    if (o.delta || o.B) {
      if (!o.delta || !o.B) throw fpp::Error("usage", "a fixed tuple needs both --delta and --B");
      const double eta = o.eta.empty() ? 1e-3 : o.eta.front();
      std::optional<GateFailure> ignored;
      j["tuple"] = tuple_json(o.d, *o.delta, eta, *o.B, *spec, so.pipeline, ignored);
    }
    run.emit_json(j);
    if (!cert.ball_excluded && !cert.diamond_strict) {
      failure = GateFailure{fpp::first_failed(cert.all_preconditions), "no verdict certified"};
    }
  } else if (cmd == "find-threshold") {
    fpp::ThresholdOptions to;
    to.shape.grid = grid_of(o);
    to.shape.pipeline = parse_pipeline(o.pipeline);
    to.shape.lower_delta = o.delta;
    to.shape.mustar_delta = o.mustar_delta;
    to.start = o.start;
    to.limit = o.limit;
    to.spot_checks = o.spot_checks;
    const auto v = fpp::parse_verdict(o.verdict);
    const auto res = fpp::find_threshold(*spec, v, to);
    Json j = fpp::report::to_json(res);
    j["verdict"] = fpp::verdict_name(v);
    j["spec"] = spec->id();
    j["tool_version"] = fpp::report::tool_version();
    run.emit_json(j);
  } else if (cmd == "saw") {
    const double budget = o.budget > 0 ? o.budget : static_cast<double>(fpp::kSawBudget);
    const auto count = fpp::saw_count(o.walk_n, o.walk_d, static_cast<std::uint64_t>(budget));
    const auto xi = fpp::xi_bounds(o.walk_d, o.walk_n);
    run.emit_json(Json{{"n", o.walk_n},
                       {"d", o.walk_d},
                       {"count", count},
                       {"root_count", xi.root_count},
                       {"lower_const", xi.lower_const},
                       {"expansion", xi.expansion},
                       {"lower_bound_holds", xi.holds}});
  } else if (cmd == "rw-overlap") {
    const auto mode = o.samples > 0 ? fpp::OverlapMode::sampled(o.samples, o.seed) : fpp::OverlapMode::exact();
    const double budget = o.budget > 0 ? o.budget : fpp::kOverlapBudget;
    const auto stats = fpp::rw_overlap_stats(o.p, o.walk_n, mode, budget);
    run.emit_csv(".csv", fpp::overlap_csv(stats), true);
  } else if (cmd == "alpha-star") {
    const auto a = fpp::alpha_star();
    const auto id = fpp::alpha_star_inf_identity();
    run.emit_json(Json{{"alpha_star", a.alpha},
                       {"companion", a.companion},
                       {"residual", a.residual},
                       {"inf_identity", {{"argmin", id.argmin}, {"inf", id.inf_value}, {"target", id.target}, {"residual", id.residual}}}});
  }

  run.finish();
  if (failure) {
    std::cerr << "gate failed: " << failure->gate << " (" << failure->detail << ")\n";
    return kExitGate;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"First-passage percolation lab: simulation of time constants and certified shape bounds", "fpplab"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", fpp::report::tool_version());
  Options o;

  auto common = [&](CLI::App* s, bool with_dist) {
    s->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    s->add_option("--config", o.config, "File of `key = value` lines mirroring flags; flags win");
    s->add_option("--out", o.out, std::string("Output directory (default $") + kOutDirEnv + " or ./fpplab_runs)");
    s->add_option("--workers", o.workers, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
    if (with_dist) s->add_option("--dist", o.dist, "Edge law, e.g. exponential:1.0, uniform:0:1")->capture_default_str();
  };
  auto simulation = [&](CLI::App* s, bool with_n) {
    common(s, true);
    s->add_option("--d", o.d, "Dimension")->required()->check(CLI::PositiveNumber);
    if (with_n) s->add_option("--n", o.n, "Target distance");
    s->add_option("--replicas", o.replicas, "Replica count")->capture_default_str();
    s->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    s->add_option("--max-settled", o.max_settled, "Settled-vertex cap")->capture_default_str();
    s->add_option("--max-time", o.max_time, "Passage-time cap");
    s->add_option("--box-margin", o.box_margin, "Coordinate box |x_i| <= n + margin, doubled until exact")
        ->capture_default_str();
    s->add_flag("--no-box", o.no_box, "Search without a coordinate box");
  };
  auto certifier = [&](CLI::App* s) {
    common(s, true);
    s->add_option("--pipeline", o.pipeline, "automatic, exponential or generic")->capture_default_str();
    s->add_option("--eta", o.eta, "eta grid values (repeatable)");
    s->add_option("--delta-points", o.delta_points, "delta grid size on [0.01, 0.99]")->capture_default_str();
    s->add_option("--B-points", o.B_points, "log-spaced B grid size on [0.1, 100]")->capture_default_str();
    s->add_option("--lower-delta-points", o.lower_delta_points, "delta grid size for lower bounds")
        ->capture_default_str();
    s->add_flag("--no-refine", o.no_refine, "Skip the local refinement pass");
    s->add_option("--mustar-delta", o.mustar_delta, "Fixed delta for the mu* lower bound");
  };

  auto* sim_mu = app.add_subcommand("simulate-mu", "Estimate mu(e_1) by b_n / n (or T(0, n e_1) / n with --point)");
  simulation(sim_mu, true);
  sim_mu->add_flag("--point", o.point, "Use the point-to-point passage time");
  auto* sim_star = app.add_subcommand("simulate-mustar", "Estimate mu* by passage time to the diagonal plane");
  simulation(sim_star, true);
  auto* slab = app.add_subcommand("slab", "Estimate the mean slab passage time");
  simulation(slab, false);
  auto* greedy = app.add_subcommand("greedy-diag", "Greedy positive walk to the diagonal plane");
  simulation(greedy, true);

  auto* up = app.add_subcommand("certify-upper", "Certified upper bound on mu(e_1)");
  certifier(up);
  up->add_option("--d", o.d, "Dimension")->required();
  up->add_option("--delta", o.delta, "Evaluate this delta (with --B) instead of optimizing");
  up->add_option("--B", o.B, "Evaluate this B (with --delta)");
  auto* low = app.add_subcommand("certify-lower", "Certified lower bounds on mu(e_1) and mu*");
  certifier(low);
  low->add_option("--d", o.d, "Dimension")->required();
  low->add_option("--delta", o.delta, "Fixed delta for the mu(e_1) lower bound");
  auto* shape = app.add_subcommand("certify-shape", "Shape certificate at one dimension");
  certifier(shape);
  shape->add_option("--d", o.d, "Dimension")->required();
  shape->add_option("--delta", o.delta, "Also evaluate this tuple (with --B)");
  shape->add_option("--B", o.B, "Also evaluate this tuple (with --delta)");
  auto* thr = app.add_subcommand("find-threshold", "Smallest certified dimension for a verdict");
  certifier(thr);
  thr->add_option("--verdict", o.verdict, "ball_excluded, cube_strict or diamond_strict")->capture_default_str();
  thr->add_option("--delta", o.delta, "Fixed delta for the mu(e_1) lower bound");
  thr->add_option("--start", o.start, "First dimension of the doubling scan")->capture_default_str();
  thr->add_option("--limit", o.limit, "Largest dimension scanned")->capture_default_str();
  thr->add_option("--spot-checks", o.spot_checks, "Larger dimensions re-checked")->capture_default_str();

  auto* saw = app.add_subcommand("saw", "Count self-avoiding walks");
  common(saw, false);
  saw->add_option("--n", o.walk_n, "Steps")->required();
  saw->add_option("--d", o.walk_d, "Dimension")->required();
  saw->add_option("--budget", o.budget, "Enumeration budget");
  auto* ov = app.add_subcommand("rw-overlap", "Overlap table of two random walks");
  common(ov, false);
  ov->add_option("--p", o.p, "Dimension")->required();
  ov->add_option("--n", o.walk_n, "Steps")->required();
  ov->add_option("--samples", o.samples, "Monte Carlo pairs (0 = exact enumeration)")->capture_default_str();
  ov->add_option("--seed", o.seed, "Seed for Monte Carlo mode")->capture_default_str();
  ov->add_option("--budget", o.budget, "Enumeration budget");
  auto* as = app.add_subcommand("alpha-star", "The constant alpha* and its companion");
  common(as, false);

  // config file: find the subcommand and splice its keys in front of the user's flags
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      CLI::App* sub = app.get_subcommand_no_throw(args[i]);
      if (!sub) continue;
      for (std::size_t k = i + 1; k < args.size(); ++k) {
        std::string path;
        if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
        if (args[k].rfind("--config=", 0) == 0) path = args[k].substr(9);
        if (path.empty()) continue;
        const auto extra = config_arguments(path, sub);
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(i) + 1, extra.begin(), extra.end());
        break;
      }
      break;
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  Run run;
  run.command = active->get_name();
  if (!o.out.empty()) {
    run.out_dir = o.out;
  } else if (const char* env = std::getenv(kOutDirEnv); env && *env) {
    run.out_dir = env;
  } else {
    run.out_dir = "fpplab_runs";
  }
  run.manifest.command = run.command;
  run.manifest.config = snapshot(active);
  run.manifest.master_seed = o.seed;
  run.manifest.started = fpp::report::utc_now();

  try {
    return dispatch(run.command, o, run);
  } catch (const fpp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == "usage") return kExitUsage;
    std::cerr << "gate failed: " << e.code() << "\n";
    return kExitGate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
