// qra: command-line front end for the reputation engine.
//
//   qra detect   --events E.jsonl --repos R.json [--out-dir D]   replay an event stream
//   qra simulate --honest N --malicious M [--out-dir D]          write a synthetic scenario
//   qra compare  [--events E --truth T --repos R]                QRA vs CUSUM false-alarm table
//
// Exit codes: 0 ok, 1 runtime failure, 2 input parse error, 3 config error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qra/io.hpp"

namespace fs = std::filesystem;
using namespace qra;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitParse = 2;
constexpr int kExitConfig = 3;

struct Overrides {
  std::string config_path;
  std::optional<double> sensitivity, sim_high, sim_low;
  std::optional<int> rank_k;
  std::optional<std::string> half_life;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
};

io::RunConfig load_config(const Overrides& o) {
  io::RunConfig cfg;
  if (!o.config_path.empty()) cfg = io::parse_config(io::read_file(o.config_path));
  if (o.sensitivity) io::set_option(cfg, "sensitivity", std::to_string(*o.sensitivity));
  if (o.sim_high) io::set_option(cfg, "sim_high", std::to_string(*o.sim_high));
  if (o.sim_low) io::set_option(cfg, "sim_low", std::to_string(*o.sim_low));
  if (o.rank_k) io::set_option(cfg, "rank_k", std::to_string(*o.rank_k));
  if (o.half_life) io::set_option(cfg, "half_life", *o.half_life);
  if (o.seed) io::set_option(cfg, "seed", std::to_string(*o.seed));
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "--set expects key=value");
    io::set_option(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  io::check_config(cfg);
  return cfg;
}

io::ParsedEvents load_events(const std::string& path, const RatingScale& scale) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  return io::parse_events(in, scale);
}

int report_parse_errors(const io::ParsedEvents& parsed, const std::string& path) {
  for (const auto& e : parsed.errors) std::cerr << path << ": " << e << '\n';
  return parsed.errors.empty() ? 0 : kExitParse;
}

struct DetectArgs {
  std::string events, repos, out_dir = ".", detector = "qra", resume, snapshot_out;
};

int cmd_detect(const DetectArgs& a, const io::RunConfig& cfg) {
  const auto parsed = load_events(a.events, cfg.pipeline.scale);
  const int parse_status = report_parse_errors(parsed, a.events);

  std::vector<UserVerdict> verdicts;
  std::vector<std::vector<std::string>> groups;
  std::optional<ReputationEngine> engine;
  if (a.detector == "qra") {
    if (!a.resume.empty()) {
      engine = io::restore_state(io::read_file(a.resume));
    } else {
      io::SeedCatalog seeds;
      if (!a.repos.empty()) seeds = io::parse_seed_catalog(io::read_file(a.repos));
      engine.emplace(cfg.pipeline, seeds.products, seeds.fallback);
    }
    const auto before = engine->log().size();
    for (const auto& ev : parsed.events) engine->process(ev);
    verdicts.assign(engine->log().begin() + static_cast<std::ptrdiff_t>(before), engine->log().end());
    groups = engine->collusion_groups();
  } else {
    verdicts = sim::run_cusum(parsed.events, cfg.pipeline.scale, cfg.cusum);
  }

  fs::create_directories(a.out_dir);
  const fs::path out(a.out_dir);
  io::write_file_atomic(out / "verdicts.csv", io::format_verdict_csv(verdicts));
  io::write_file_atomic(out / "trace.csv", io::format_trace_csv(verdicts));
  const auto summary = io::format_summary(verdicts, cfg, groups);
  io::write_file_atomic(out / "summary.txt", summary);
  if (engine && !a.snapshot_out.empty()) io::write_file_atomic(a.snapshot_out, io::snapshot_state(*engine));
  std::cout << summary;
  return parse_status;
}

struct SimulateArgs {
  int honest = 7, malicious = 3;
  std::string out_dir = ".";
};

int cmd_simulate(const SimulateArgs& a, const io::RunConfig& cfg) {
  if (a.honest < 0 || a.malicious < 0) throw Error(ErrorCode::InvalidConfig, "rater counts must be >= 0");
  sim::ScenarioOptions opts;
  opts.scale = cfg.pipeline.scale;
  const auto sc = sim::generate_scenario(a.honest, a.malicious, cfg.quality, cfg.attack, cfg.seed, opts);

  std::string events;
  for (const auto& ev : sc.events) events += io::format_event(ev) + '\n';
  io::SeedCatalog cat;
  cat.fallback = sc.repository_seed;

  fs::create_directories(a.out_dir);
  const fs::path out(a.out_dir);
  io::write_file_atomic(out / "events.jsonl", events);
  io::write_file_atomic(out / "truth.csv", io::format_truth_csv(sc.truth));
  io::write_file_atomic(out / "repos.json", io::format_seed_catalog(cat));
  std::cout << "wrote " << sc.events.size() << " events (seed " << cfg.seed << ") to " << a.out_dir << '\n';
  return 0;
}

struct CompareArgs {
  std::string events, truth, repos, out;
};

int cmd_compare(const CompareArgs& a, const io::RunConfig& cfg) {
  std::vector<sim::SuiteRow> rows;
  int status = 0;
  if (!a.events.empty()) {
    if (a.truth.empty()) throw Error(ErrorCode::InvalidConfig, "--events needs --truth");
    const auto parsed = load_events(a.events, cfg.pipeline.scale);
    status = report_parse_errors(parsed, a.events);
    sim::Scenario sc;
    sc.events = parsed.events;
    sc.truth = io::parse_truth_csv(io::read_file(a.truth));
    sc.seed = cfg.seed;
    sc.repository_seed = sim::scenario_product_seed();
    if (!a.repos.empty()) {
      const auto cat = io::parse_seed_catalog(io::read_file(a.repos));
      if (cat.fallback) sc.repository_seed = *cat.fallback;
    }
    const auto c = sim::compare_detectors(sc, cfg.pipeline, cfg.cusum);
    rows.push_back({c.n_users, c.qra.false_alarm_rate, c.cusum.false_alarm_rate, c.qra.detection_rate,
                    c.cusum.detection_rate, 1});
  } else {
    sim::SuiteOptions opts;
    opts.sizes = cfg.sizes;
    opts.seeds = cfg.seeds;
    opts.base_seed = cfg.seed;
    opts.malicious_fraction = cfg.malicious_fraction;
    opts.quality = cfg.quality;
    opts.attack = cfg.attack;
    opts.scenario.scale = cfg.pipeline.scale;
    rows = sim::run_suite(opts, cfg.pipeline, cfg.cusum);
  }
  const auto csv = io::format_comparison_csv(rows);
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    io::write_file_atomic(a.out, csv);
    std::cout << csv;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quality-repository reputation engine"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--sensitivity", o.sensitivity, "additive sensitivity on the threshold deviation");
  app.add_option("--sim-high", o.sim_high, "similarity at or above which feedback is level 1");
  app.add_option("--sim-low", o.sim_low, "similarity below which feedback is level 3");
  app.add_option("--rank-k", o.rank_k, "LSI rank");
  app.add_option("--half-life", o.half_life, "repository forgetting half-life, e.g. 90d");
  app.add_option("--seed", o.seed, "scenario seed");
  app.add_option("--set", o.sets, "extra config override key=value (repeatable)");

  DetectArgs d;
  auto* detect = app.add_subcommand("detect", "replay an event file through the detector");
  detect->add_option("--events", d.events, "line-delimited JSON events")->required();
  detect->add_option("--repos", d.repos, "manufacturer seed file (JSON)");
  detect->add_option("--out-dir", d.out_dir, "directory for verdicts.csv, trace.csv, summary.txt");
  detect->add_option("--detector", d.detector)->check(CLI::IsMember({"qra", "cusum"}));
  detect->add_option("--resume", d.resume, "restore engine state from a snapshot first");
  detect->add_option("--snapshot-out", d.snapshot_out, "write engine state after the run");

  SimulateArgs s;
  auto* simulate = app.add_subcommand("simulate", "generate a seeded attack scenario");
  simulate->add_option("--honest", s.honest);
  simulate->add_option("--malicious", s.malicious);
  simulate->add_option("--out-dir", s.out_dir);

  CompareArgs c;
  auto* compare = app.add_subcommand("compare", "false-alarm comparison of QRA and CUSUM");
  compare->add_option("--events", c.events, "compare on a given scenario instead of generating");
  compare->add_option("--truth", c.truth, "ground truth CSV for --events");
  compare->add_option("--repos", c.repos, "seed file for --events");
  compare->add_option("--out", c.out, "CSV output path (stdout otherwise)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  io::RunConfig cfg;
  try {
    cfg = load_config(o);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*detect) return cmd_detect(d, cfg);
    if (*simulate) return cmd_simulate(s, cfg);
    return cmd_compare(c, cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::ParseError:
      case ErrorCode::OutOfScaleRating:
      case ErrorCode::MissingField:
      case ErrorCode::NegativeTimestamp:
        return kExitParse;
      case ErrorCode::InvalidConfig:
      case ErrorCode::EmptyCorpus:
        return kExitConfig;
      default:
        return kExitRuntime;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
