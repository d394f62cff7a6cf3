#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "incagg/aggregator.hpp"
#include "incagg/config.hpp"
#include "incagg/detector.hpp"
#include "incagg/error.hpp"
#include "incagg/impact_graph.hpp"
#include "incagg/io.hpp"
#include "incagg/metrics.hpp"
#include "incagg/pipeline.hpp"
#include "incagg/sgns.hpp"
#include "incagg/simulator.hpp"
#include "incagg/walks.hpp"

namespace fs = std::filesystem;
using namespace incagg;

namespace {

struct SimulateArgs {
  std::optional<std::string> config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

struct DetectArgs {
  std::string incidents;
  std::string topology;
  std::string mode = "evt";
  std::int64_t threshold = 50;
  double risk_q = 1e-3;
  double peak_frac = 0.02;
  std::size_t calib = 288;
  std::string partition = "none";
  std::optional<Minute> from;
  std::optional<Minute> to;
  std::string out;
};

struct ImpactArgs {
  std::string topology, incidents, kpis, windows, out;
  std::uint64_t seed = 1;
  std::string mode = "full";
  double alpha = 0.5;
};

struct TrainArgs {
  std::string graphs, topology, out;
  std::optional<std::string> config;
};

struct AggregateArgs {
  std::string incidents, embedding, topology, out;
  double lambda = 0.7;
  int tau = 4;
  double risk_q = 1e-3;
  double peak_frac = 0.02;
  std::size_t calib = 288;
  Minute group_from = 0;
};

struct EvalArgs {
  std::string mode;
  std::string predicted, truth;
  std::optional<std::string> incidents, topology;
};

struct PipelineArgs {
  std::string config;
  std::string mode = "full";
  std::optional<std::string> out;
};

void run_simulate(const SimulateArgs& a) {
  KeyValueConfig kv;
  if (a.config) kv = KeyValueConfig::load(*a.config);
  auto cfg = sim::scenario_config_from(kv);
  if (a.seed) cfg.seed = *a.seed;
  const auto sc = sim::generate_scenario(cfg);
  sim::save_scenario(a.out, sc);
  spdlog::info("wrote {} incidents and {} failures to {}", sc.incidents.size(), sc.truth.failures.size(), a.out);
}

detect::PartitionKey partition_key(const std::string& name, const Topology& topo) {
  if (name == "none") return {};
  if (name == "layer") {
    return [&topo](const IncidentRecord& r) { return std::string(to_string(topo.layer(r.node))); };
  }
  if (name == "node-prefix") {
    return [&topo](const IncidentRecord& r) {
      const auto& n = topo.name(r.node);
      return n.substr(0, n.find('.'));
    };
  }
  throw ValidationError("unknown partition '" + name + "'");
}

void run_detect(const DetectArgs& a) {
  const auto topo = io::load_topology(a.topology);
  const auto log = io::load_incidents(a.incidents, topo);
  detect::DetectOptions opts;
  opts.mode = a.mode == "fixed" ? detect::DetectMode::kFixed : detect::DetectMode::kEvt;
  opts.evt.risk_q = a.risk_q;
  opts.evt.peak_frac = a.peak_frac;
  opts.evt.calib_n = a.calib;
  opts.fixed_threshold = a.threshold;
  if (a.from) opts.from = *a.from;
  if (a.to) opts.to = *a.to;
  const auto windows = detect::detect_log(log, opts, partition_key(a.partition, topo));
  io::save_windows(a.out, windows);
  spdlog::info("{} failure windows", windows.size());
}

void run_impact(const ImpactArgs& a) {
  const auto topo = io::load_topology(a.topology);
  const auto log = io::load_incidents(a.incidents, topo);
  const auto kpis = io::load_kpis(a.kpis, topo);
  const auto windows = io::load_windows(a.windows);
  impact::ImpactConfig cfg;
  cfg.alpha = a.alpha;
  cfg.completion = pipeline::parse_mode(a.mode) == pipeline::Mode::kFull;
  std::vector<FailureImpactGraph> graphs;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    auto part = impact::build_impact_graphs(topo, windows[w], log, kpis, a.seed + w, cfg);
    graphs.insert(graphs.end(), part.begin(), part.end());
  }
  io::save_impact_graphs(a.out, graphs, topo, log.types);
  spdlog::info("{} impact graphs from {} windows", graphs.size(), windows.size());
}

void run_train(const TrainArgs& a) {
  const auto topo = io::load_topology(a.topology);
  const auto set = io::load_impact_graphs(a.graphs, topo);
  KeyValueConfig kv;
  if (a.config) kv = KeyValueConfig::load(*a.config);
  const auto cfg = embed::walk_config_from(kv);
  const auto corpus = embed::generate_walks(set.graphs, set.types, topo, cfg);
  const auto emb = embed::train(corpus, cfg);
  io::save_embedding(a.out, emb);
  spdlog::info("embedded {} incident types from {} walk tokens", emb.size(), corpus.token_count());
}

void run_aggregate(const AggregateArgs& a) {
  const auto topo = io::load_topology(a.topology);
  const auto log = io::load_incidents(a.incidents, topo);
  const auto emb = io::load_embedding(a.embedding);
  online::AggregateOptions opts;
  opts.agg.lambda = a.lambda;
  opts.agg.tau = a.tau;
  opts.evt.risk_q = a.risk_q;
  opts.evt.peak_frac = a.peak_frac;
  opts.evt.calib_n = a.calib;
  opts.group_from = a.group_from;
  const auto groups = online::aggregate_stream(log, emb, topo, opts);
  online::save_groups(a.out, groups, topo, log.types);
  spdlog::info("{} groups", groups.size());
}

void run_eval(const EvalArgs& a) {
  pipeline::Report report;
  if (a.mode == "detect") {
    const auto s = metrics::score_detection(io::load_windows(a.predicted), io::load_windows(a.truth));
    report = {{"tp", std::to_string(s.tp)},
              {"fp", std::to_string(s.fp)},
              {"fn", std::to_string(s.fn)},
              {"precision", io::format_real(s.precision)},
              {"recall", io::format_real(s.recall)},
              {"f1", io::format_real(s.f1)}};
  } else if (a.mode == "aggregate") {
    if (!a.incidents || !a.topology) throw ValidationError("aggregate evaluation needs --incidents and --topology");
    const auto topo = io::load_topology(*a.topology);
    const auto log = io::load_incidents(*a.incidents, topo);
    const auto rows = online::load_groups(a.predicted);
    const auto labels = io::load_ground_truth(a.truth);
    std::vector<int> ids;
    for (const auto& r : rows) ids.push_back(r.group_id);
    const auto aligned = sim::label_clustering(ids, online::resolve_group_rows(rows, log, topo), labels);
    report = {{"incidents", std::to_string(aligned.classes.size())},
              {"nmi", aligned.classes.empty() ? "nan" : io::format_real(metrics::nmi(aligned.clusters, aligned.classes))}};
  } else {
    throw ValidationError("unknown eval mode '" + a.mode + "'");
  }
  std::string line;
  for (const auto& [k, v] : report) line += (line.empty() ? "" : " ") + k + "=" + v;
  std::cout << line << '\n';
}

void run_pipeline_cmd(const PipelineArgs& a) {
  const fs::path config_path(a.config);
  const auto cfg = pipeline::pipeline_config_from(KeyValueConfig::load(config_path), config_path.parent_path());
  std::optional<fs::path> out;
  if (a.out) out = fs::path(*a.out);
  const auto report = pipeline::run_pipeline(cfg, pipeline::parse_mode(a.mode), out);
  std::cout << pipeline::format_report(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incident aggregation toolkit"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Generate a labeled synthetic scenario");
  simulate->add_option("--config", sim_args.config, "Scenario key=value file")->check(CLI::ExistingFile);
  simulate->add_option("--out", sim_args.out, "Output directory")->required();
  simulate->add_option("--seed", sim_args.seed, "Override the scenario seed");

  DetectArgs det;
  auto* detect_cmd = app.add_subcommand("detect", "Detect failure windows in an incident stream");
  detect_cmd->add_option("--incidents", det.incidents)->required()->check(CLI::ExistingFile);
  detect_cmd->add_option("--topology", det.topology)->required()->check(CLI::ExistingFile);
  detect_cmd->add_option("--mode", det.mode)->check(CLI::IsMember({"evt", "fixed"}));
  detect_cmd->add_option("--threshold", det.threshold, "Fixed-mode per-minute threshold");
  detect_cmd->add_option("--risk-q", det.risk_q);
  detect_cmd->add_option("--peak-frac", det.peak_frac);
  detect_cmd->add_option("--calib-minutes", det.calib);
  detect_cmd->add_option("--partition", det.partition, "none, layer or node-prefix (text before the first '.')")
      ->check(CLI::IsMember({"none", "layer", "node-prefix"}));
  detect_cmd->add_option("--from", det.from);
  detect_cmd->add_option("--to", det.to);
  detect_cmd->add_option("--out", det.out)->required();

  ImpactArgs imp;
  auto* impact_cmd = app.add_subcommand("impact", "Build failure impact graphs");
  impact_cmd->add_option("--topology", imp.topology)->required()->check(CLI::ExistingFile);
  impact_cmd->add_option("--incidents", imp.incidents)->required()->check(CLI::ExistingFile);
  impact_cmd->add_option("--kpis", imp.kpis)->required()->check(CLI::ExistingFile);
  impact_cmd->add_option("--windows", imp.windows)->required()->check(CLI::ExistingFile);
  impact_cmd->add_option("--seed", imp.seed);
  impact_cmd->add_option("--mode", imp.mode)->check(CLI::IsMember({"full", "no-completion"}));
  impact_cmd->add_option("--alpha", imp.alpha);
  impact_cmd->add_option("--out", imp.out)->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Learn incident-type embeddings from impact graphs");
  train_cmd->add_option("--impact-graphs", tr.graphs)->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("--topology", tr.topology)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--config", tr.config, "Walk and training key=value file")->check(CLI::ExistingFile);
  train_cmd->add_option("--out", tr.out)->required();

  AggregateArgs agg;
  auto* aggregate_cmd = app.add_subcommand("aggregate", "Group a stream's failure incidents online");
  aggregate_cmd->add_option("--incidents", agg.incidents)->required()->check(CLI::ExistingFile);
  aggregate_cmd->add_option("--embedding", agg.embedding)->required()->check(CLI::ExistingFile);
  aggregate_cmd->add_option("--topology", agg.topology)->required()->check(CLI::ExistingFile);
  aggregate_cmd->add_option("--lambda", agg.lambda);
  aggregate_cmd->add_option("--tau", agg.tau);
  aggregate_cmd->add_option("--risk-q", agg.risk_q);
  aggregate_cmd->add_option("--peak-frac", agg.peak_frac);
  aggregate_cmd->add_option("--calib-minutes", agg.calib);
  aggregate_cmd->add_option("--group-from", agg.group_from, "Observe earlier minutes without grouping");
  aggregate_cmd->add_option("--out", agg.out)->required();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score detection windows or groups");
  eval_cmd->add_option("--mode", ev.mode)->required()->check(CLI::IsMember({"detect", "aggregate"}));
  eval_cmd->add_option("--predicted", ev.predicted, "Windows or groups file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--truth", ev.truth, "Truth windows or ground-truth labels")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--incidents", ev.incidents, "Incident log (aggregate mode)")->check(CLI::ExistingFile);
  eval_cmd->add_option("--topology", ev.topology, "Topology (aggregate mode)")->check(CLI::ExistingFile);

  PipelineArgs pl;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Run every stage end to end");
  pipeline_cmd->add_option("--config", pl.config)->required()->check(CLI::ExistingFile);
  pipeline_cmd->add_option("--mode", pl.mode)->check(CLI::IsMember({"full", "no-completion"}));
  pipeline_cmd->add_option("--out", pl.out);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_mt("incagg"));
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*simulate) run_simulate(sim_args);
    if (*detect_cmd) run_detect(det);
    if (*impact_cmd) run_impact(imp);
    if (*train_cmd) run_train(tr);
    if (*aggregate_cmd) run_aggregate(agg);
    if (*eval_cmd) run_eval(ev);
    if (*pipeline_cmd) run_pipeline_cmd(pl);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
