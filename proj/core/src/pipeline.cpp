#include "incagg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

#include "incagg/detector.hpp"
#include "incagg/io.hpp"
#include "incagg/metrics.hpp"
#include "incagg/sgns.hpp"

namespace incagg::pipeline {

Mode parse_mode(const std::string& text) {
  if (text == "full") return Mode::kFull;
  if (text == "no-completion") return Mode::kNoCompletion;
  throw ValidationError("unknown mode '" + text + "' (expected full or no-completion)");
}

std::string to_string(Mode mode) { return mode == Mode::kFull ? "full" : "no-completion"; }

namespace {

const std::vector<std::string> kKnownKeys{
    "risk_q",   "peak_frac",     "calib_minutes", "fixed_threshold", "alpha",        "kpi_lookback",
    "kpi_peak_frac", "kpi_risk_q", "walk_length", "walks_per_start", "window",      "dim",
    "epochs",   "negatives",     "learning_rate", "workers",         "lambda",       "tau",
    "split",    "seed",          "topology",      "incidents",       "kpis",         "ground_truth",
    "truth_windows", "horizon",  "simulate"};

std::uint64_t derive(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 7);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <typename F>
auto stage(const std::string& name, F&& body) -> decltype(body()) {
  const auto started = std::chrono::steady_clock::now();
  struct Timer {
    const std::string& name;
    std::chrono::steady_clock::time_point started;
    ~Timer() {
      const std::chrono::duration<double> spent = std::chrono::steady_clock::now() - started;
      spdlog::debug("stage {} took {:.3f} s", name, spent.count());
    }
  } timer{name, started};
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string real(double v) { return io::format_real(v); }

void add_score(Report& report, const std::string& prefix, const metrics::DetectionScore& s) {
  report.emplace_back(prefix + "_tp", std::to_string(s.tp));
  report.emplace_back(prefix + "_fp", std::to_string(s.fp));
  report.emplace_back(prefix + "_fn", std::to_string(s.fn));
  report.emplace_back(prefix + "_precision", real(s.precision));
  report.emplace_back(prefix + "_recall", real(s.recall));
  report.emplace_back(prefix + "_f1", real(s.f1));
}

}  // namespace

PipelineConfig pipeline_config_from(const KeyValueConfig& kv, const std::filesystem::path& base_dir) {
  std::vector<std::string> unknown;
  for (const auto& key : kv.unknown_keys(kKnownKeys)) {
    if (key.rfind("sim.", 0) != 0) unknown.push_back(key);
  }
  if (!unknown.empty()) throw ValidationError(kv.source() + ": unknown key '" + unknown.front() + "'");

  PipelineConfig cfg;
  cfg.evt.risk_q = kv.get_double("risk_q", cfg.evt.risk_q);
  cfg.evt.peak_frac = kv.get_double("peak_frac", cfg.evt.peak_frac);
  cfg.evt.calib_n = static_cast<std::size_t>(kv.get_int("calib_minutes", static_cast<long long>(cfg.evt.calib_n)));
  detect::validate(cfg.evt);
  cfg.fixed_threshold = kv.get_int("fixed_threshold", cfg.fixed_threshold);
  cfg.impact.alpha = kv.get_double("alpha", cfg.impact.alpha);
  if (!(cfg.impact.alpha >= 0.0 && cfg.impact.alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
  cfg.impact.kpi_lookback = kv.get_int("kpi_lookback", cfg.impact.kpi_lookback);
  cfg.impact.kpi_evt.peak_frac = kv.get_double("kpi_peak_frac", cfg.impact.kpi_evt.peak_frac);
  cfg.impact.kpi_evt.risk_q = kv.get_double("kpi_risk_q", cfg.impact.kpi_evt.risk_q);
  cfg.impact.kpi_evt.calib_n = static_cast<std::size_t>(std::max<Minute>(1, cfg.impact.kpi_lookback));
  detect::validate(cfg.impact.kpi_evt);
  cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(cfg.seed)));
  cfg.walk.seed = cfg.seed;
  cfg.walk = embed::walk_config_from(kv, cfg.walk);
  cfg.agg.lambda = kv.get_double("lambda", cfg.agg.lambda);
  cfg.agg.tau = static_cast<int>(kv.get_int("tau", cfg.agg.tau));
  online::validate(cfg.agg);
  cfg.split = kv.get_double("split", cfg.split);
  if (!(cfg.split > 0.0 && cfg.split < 1.0)) throw ValidationError("split must lie in (0, 1)");

  auto path = [&](const char* key) -> std::optional<std::filesystem::path> {
    const auto v = kv.get(key);
    if (!v) return std::nullopt;
    std::filesystem::path p(*v);
    return p.is_relative() ? base_dir / p : p;
  };
  cfg.topology = path("topology");
  cfg.incidents = path("incidents");
  cfg.kpis = path("kpis");
  cfg.ground_truth = path("ground_truth");
  cfg.truth_windows = path("truth_windows");
  if (kv.has("horizon")) cfg.horizon = kv.get_int("horizon", 0);

  if (kv.get_bool("simulate", false)) {
    sim::ScenarioConfig base;
    base.seed = cfg.seed;
    cfg.scenario = sim::scenario_config_from(kv.with_prefix("sim."), base);
  } else if (!cfg.topology || !cfg.incidents || !cfg.kpis) {
    throw ValidationError("config needs topology, incidents and kpis paths, or simulate=true");
  }
  return cfg;
}

std::string format_report(const Report& report) {
  std::string out;
  for (const auto& [k, v] : report) out += k + "=" + v + "\n";
  return out;
}

Report run_pipeline(const PipelineConfig& cfg, Mode mode, const std::optional<std::filesystem::path>& out_dir) {
  Report report;
  report.emplace_back("mode", to_string(mode));
  if (out_dir) std::filesystem::create_directories(*out_dir);

  Topology topo;
  IncidentLog log;
  KpiStore kpis;
  std::optional<std::vector<int>> labels;
  std::optional<std::vector<FailureWindow>> truth_windows;
  Minute horizon = 0;

  stage(cfg.scenario ? "simulate" : "load", [&] {
    if (cfg.scenario) {
      auto sc = sim::generate_scenario(*cfg.scenario);
      if (out_dir) sim::save_scenario(*out_dir / "scenario", sc);
      topo = std::move(sc.topology);
      log = std::move(sc.incidents);
      kpis = std::move(sc.kpis);
      labels = sc.truth.labels;
      truth_windows = sc.truth.windows();
      horizon = cfg.scenario->duration_minutes - 1;
    } else {
      topo = io::load_topology(*cfg.topology);
      log = io::load_incidents(*cfg.incidents, topo);
      kpis = io::load_kpis(*cfg.kpis, topo);
      if (cfg.ground_truth) {
        labels = io::load_ground_truth(*cfg.ground_truth);
        if (labels->size() != log.size()) throw ValidationError("ground truth does not cover every incident");
      }
      if (cfg.truth_windows) truth_windows = io::load_windows(*cfg.truth_windows);
      horizon = log.empty() ? 0 : log.records.back().minute;
    }
    if (cfg.horizon) horizon = *cfg.horizon;
  });
  report.emplace_back("nodes", std::to_string(topo.node_count()));
  report.emplace_back("incidents", std::to_string(log.size()));
  report.emplace_back("horizon", std::to_string(horizon));

  std::vector<FailureWindow> detected;
  stage("detect", [&] {
    const auto counts = detect::count_per_minute(log.records, 0, horizon);
    detect::EvtDetector detector(cfg.evt);
    detected = detect::detect_failures(counts, detector, 0);
    const auto fixed = detect::fixed_threshold_detect(counts, cfg.fixed_threshold, 0);
    report.emplace_back("detected_windows", std::to_string(detected.size()));
    report.emplace_back("fixed_windows", std::to_string(fixed.size()));
    if (truth_windows) {
      add_score(report, "evt", metrics::score_detection(detected, *truth_windows));
      add_score(report, "fixed", metrics::score_detection(fixed, *truth_windows));
    }
    if (out_dir) {
      io::save_windows(*out_dir / "detected_windows.txt", detected);
      io::save_windows(*out_dir / "fixed_windows.txt", fixed);
    }
  });

  const auto split_minute = static_cast<Minute>(std::floor(cfg.split * static_cast<double>(horizon + 1)));
  report.emplace_back("split_minute", std::to_string(split_minute));

  std::vector<FailureImpactGraph> graphs;
  stage("impact", [&] {
    impact::ImpactConfig icfg = cfg.impact;
    icfg.completion = mode == Mode::kFull;
    std::size_t used = 0;
    for (std::size_t w = 0; w < detected.size(); ++w) {
      if (detected[w].end >= split_minute) continue;
      ++used;
      auto part = impact::build_impact_graphs(topo, detected[w], log, kpis, derive(cfg.seed, w), icfg);
      graphs.insert(graphs.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    report.emplace_back("training_windows", std::to_string(used));
    report.emplace_back("impact_graphs", std::to_string(graphs.size()));
    if (out_dir) io::save_impact_graphs(*out_dir / "impact", graphs, topo, log.types);
  });

  IncidentEmbedding emb(static_cast<std::size_t>(cfg.walk.dim));
  stage("train", [&] {
    const auto corpus = embed::generate_walks(graphs, log.types, topo, cfg.walk);
    report.emplace_back("walk_tokens", std::to_string(corpus.token_count()));
    emb = embed::train(corpus, cfg.walk);
    report.emplace_back("embedded_types", std::to_string(emb.size()));
    if (out_dir) io::save_embedding(*out_dir / "embedding.txt", emb);
  });

  std::vector<online::IncidentGroup> groups;
  stage("aggregate", [&] {
    online::AggregateOptions opts;
    opts.evt = cfg.evt;
    opts.agg = cfg.agg;
    opts.from = 0;
    opts.to = horizon;
    opts.group_from = split_minute;
    groups = online::aggregate_stream(log, emb, topo, opts);
    std::size_t members = 0;
    for (const auto& g : groups) members += g.members.size();
    report.emplace_back("groups", std::to_string(groups.size()));
    report.emplace_back("grouped_incidents", std::to_string(members));
    if (out_dir) online::save_groups(*out_dir / "groups.txt", groups, topo, log.types);
  });

  stage("eval", [&] {
    if (!labels) return;
    const auto aligned = sim::label_clustering(groups, *labels);
    report.emplace_back("evaluated_incidents", std::to_string(aligned.classes.size()));
    report.emplace_back("nmi", aligned.classes.empty() ? "nan" : real(metrics::nmi(aligned.clusters, aligned.classes)));
  });

  if (out_dir) io::write_file(*out_dir / "report.txt", format_report(report));
  spdlog::debug("pipeline finished in mode {}", to_string(mode));
  return report;
}

}  // namespace incagg::pipeline
