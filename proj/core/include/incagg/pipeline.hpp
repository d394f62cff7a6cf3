#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "incagg/aggregator.hpp"
#include "incagg/config.hpp"
#include "incagg/error.hpp"
#include "incagg/evt.hpp"
#include "incagg/impact_graph.hpp"
#include "incagg/simulator.hpp"
#include "incagg/walks.hpp"

namespace incagg::pipeline {

enum class Mode { kFull, kNoCompletion };

Mode parse_mode(const std::string& text);
std::string to_string(Mode mode);

struct PipelineConfig {
  detect::EvtConfig evt;
  std::int64_t fixed_threshold = 50;
  impact::ImpactConfig impact;
  embed::WalkConfig walk;
  online::AggregatorConfig agg;
  double split = 5.0 / 6.0;  // fraction of the timeline used for training
  std::uint64_t seed = 1;

  // Data: either existing files or an inline simulated scenario.
  std::optional<std::filesystem::path> topology;
  std::optional<std::filesystem::path> incidents;
  std::optional<std::filesystem::path> kpis;
  std::optional<std::filesystem::path> ground_truth;
  std::optional<std::filesystem::path> truth_windows;
  std::optional<sim::ScenarioConfig> scenario;
  std::optional<std::int64_t> horizon;  // last minute; defaults to scenario duration or last incident
};

/// Keys: risk_q, peak_frac, calib_minutes, fixed_threshold, alpha,
/// kpi_lookback, kpi_peak_frac, kpi_risk_q, walk_length, walks_per_start,
/// window, dim, epochs, negatives, learning_rate, workers, lambda, tau,
/// split, seed, topology, incidents, kpis, ground_truth, truth_windows,
/// horizon, and `sim.<field>` for an inline scenario (`simulate=true`).
/// Relative paths resolve against `base_dir`.
PipelineConfig pipeline_config_from(const KeyValueConfig& kv, const std::filesystem::path& base_dir = {});

/// Ordered `metric=value` pairs.
using Report = std::vector<std::pair<std::string, std::string>>;

std::string format_report(const Report& report);

/// Raised with the failing stage's name prepended.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& cause)
      : Error(stage + ": " + cause), stage_(stage) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// simulate (optional) -> detect -> impact -> train -> aggregate -> eval.
/// When `out_dir` is set, every intermediate artifact and report.txt are
/// written there.
Report run_pipeline(const PipelineConfig& cfg, Mode mode,
                    const std::optional<std::filesystem::path>& out_dir = std::nullopt);

}  // namespace incagg::pipeline
