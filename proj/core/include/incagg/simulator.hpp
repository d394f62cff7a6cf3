#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "incagg/aggregator.hpp"
#include "incagg/config.hpp"
#include "incagg/records.hpp"
#include "incagg/topology.hpp"

namespace incagg::sim {

enum class FailureProfile { kBurst, kRamp };

/// What a failure-class incident type is tied to: the hop distance from the
/// root, or the reporting node itself.
enum class VocabularyScope { kTier, kNode };

/// Synthetic cascading-failure scenario. The topology is a three-layer
/// placement hierarchy (infrastructure <- platform <- application) plus
/// random intra-layer dependency edges.
struct ScenarioConfig {
  std::uint64_t seed = 1;

  int app_nodes = 40;
  int platform_nodes = 40;
  int infra_nodes = 20;
  int dependency_degree = 1;  // intra-layer edges added per node

  double noise_rate = 0.02;  // Poisson mean per node-minute
  int noise_vocab = 30;
  bool shared_noise = false;  // noise may also draw failure types

  int n_failures = 5;
  int failure_classes = 5;  // failure i belongs to class i % failure_classes
  VocabularyScope vocabulary = VocabularyScope::kNode;
  int types_per_slot = 3;   // types per tier or per node in each class vocabulary
  bool failure_overlap = false;  // failures start in simultaneous pairs
  double silent_prob = 0.3;
  /// Silence is a property of the node (an unmonitored component), drawn
  /// once per node rather than per failure.
  bool persistent_silence = true;
  /// Failures of one class recur with the affected set of the class's first
  /// failure.
  bool recurring_cascades = true;
  double attenuation = 0.7;  // a node h hops from the root is hit with prob attenuation^h
  int max_hops = 4;
  int min_affected = 4;      // roots are redrawn until the cascade is this large
  double incidents_per_failure_node = 6.0;
  int failure_minutes = 8;
  int first_failure_minute = 300;
  int duration_minutes = 1800;

  int ramp_failures = 0;  // the first k failures ramp up instead of bursting
  int ramp_minutes = 10;
  double ramp_peak = 25.0;  // plateau incidents per minute of a ramp failure

  int kpi_lag_max = 5;
  double kpi_baseline = 20.0;
  double kpi_jitter = 1.0;
  double kpi_pulse = 40.0;  // pulse height; pulse noise sd is 5% of it
  std::vector<std::string> kpi_names{"cpu_util", "round_trip_delay"};
};

/// Throws ValidationError for impossible configurations.
void validate(const ScenarioConfig& cfg);
ScenarioConfig scenario_config_from(const KeyValueConfig& kv, ScenarioConfig base = {});

inline constexpr int kNoise = -1;

struct FailureTruth {
  int id = 0;
  int failure_class = 0;
  FailureProfile profile = FailureProfile::kBurst;
  FailureWindow window;
  NodeId root = 0;
  std::vector<NodeId> affected;  // BFS order, root first
  std::vector<int> hops;         // hop distance of each affected node
  std::vector<NodeId> silent;    // sorted
  std::vector<std::string> vocabulary;
};

struct GroundTruth {
  std::vector<int> labels;  // per incident: failure id or kNoise
  std::vector<FailureTruth> failures;

  /// Injected windows sorted by start, overlapping ones merged.
  std::vector<FailureWindow> windows() const;
};

struct Scenario {
  Topology topology;
  IncidentLog incidents;
  KpiStore kpis;
  GroundTruth truth;
};

/// Deterministic for a given config.
Scenario generate_scenario(const ScenarioConfig& cfg);

/// Writes topology.txt, incidents.txt, kpis.txt, ground_truth.txt,
/// truth_windows.txt and failures.txt.
void save_scenario(const std::filesystem::path& dir, const Scenario& scenario);

/// Per-incident cluster and class labels over grouped failure incidents
/// (noise excluded), in group order.
struct LabelAlignment {
  std::vector<int> clusters;
  std::vector<int> classes;
  std::vector<std::size_t> indices;
};

/// Throws LookupError when a grouped incident index has no label.
LabelAlignment label_clustering(const std::vector<online::IncidentGroup>& groups,
                                const std::vector<int>& labels);
/// Same, for group rows already resolved to incident indices.
LabelAlignment label_clustering(const std::vector<int>& group_ids, const std::vector<std::size_t>& indices,
                                const std::vector<int>& labels);

}  // namespace incagg::sim
