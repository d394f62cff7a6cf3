#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "incagg/error.hpp"
#include "incagg/impact_graph.hpp"
#include "incagg/metrics.hpp"
#include "incagg/simulator.hpp"

namespace incagg::sim {
namespace {

namespace fs = std::filesystem;

ScenarioConfig small_config(std::uint64_t seed = 1) {
  ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.n_failures = 6;
  cfg.duration_minutes = 900;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Simulator, QuietConfigurationIsEmpty) {
  ScenarioConfig cfg;
  cfg.noise_rate = 0.0;
  cfg.n_failures = 0;
  const auto sc = generate_scenario(cfg);
  EXPECT_TRUE(sc.incidents.empty());
  EXPECT_TRUE(sc.truth.failures.empty());
  EXPECT_EQ(sc.kpis.size(), sc.topology.node_count() * cfg.kpi_names.size());
  for (const auto& s : sc.kpis.all()) {
    for (double v : s.values) EXPECT_LT(std::abs(v - cfg.kpi_baseline), 6.0 * cfg.kpi_jitter);
  }
  cfg.kpi_jitter = 0.0;
  const auto flat = generate_scenario(cfg);
  for (const auto& s : flat.kpis.all()) {
    EXPECT_EQ(s.values, std::vector<double>(s.values.size(), cfg.kpi_baseline));
  }
}

TEST(Simulator, RejectsImpossibleConfigurations) {
  ScenarioConfig cfg;
  cfg.app_nodes = cfg.platform_nodes = cfg.infra_nodes = 0;
  EXPECT_THROW(validate(cfg), ValidationError);
  cfg = ScenarioConfig{};
  cfg.silent_prob = 1.5;
  EXPECT_THROW(validate(cfg), ValidationError);
  cfg = ScenarioConfig{};
  cfg.n_failures = 500;
  EXPECT_THROW(validate(cfg), ValidationError);
}

TEST(Simulator, SameSeedWritesByteIdenticalFiles) {
  const auto base = fs::temp_directory_path() / "incagg_sim_test";
  fs::remove_all(base);
  const auto cfg = small_config(4);
  save_scenario(base / "a", generate_scenario(cfg));
  save_scenario(base / "b", generate_scenario(cfg));
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    ++files;
    EXPECT_EQ(slurp(entry.path()), slurp(base / "b" / entry.path().filename())) << entry.path();
  }
  EXPECT_EQ(files, 6u);
  auto other = cfg;
  other.seed = 5;
  save_scenario(base / "c", generate_scenario(other));
  EXPECT_NE(slurp(base / "a" / "incidents.txt"), slurp(base / "c" / "incidents.txt"));
  fs::remove_all(base);
}

TEST(Simulator, GroundTruthIsConsistent) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto cfg = small_config(seed);
    const auto sc = generate_scenario(cfg);
    ASSERT_EQ(sc.truth.labels.size(), sc.incidents.size());
    ASSERT_EQ(sc.truth.failures.size(), static_cast<std::size_t>(cfg.n_failures));
    std::set<std::string> failure_types;
    for (const auto& f : sc.truth.failures) failure_types.insert(f.vocabulary.begin(), f.vocabulary.end());
    for (std::size_t i = 0; i < sc.incidents.size(); ++i) {
      const auto& r = sc.incidents.records[i];
      const int label = sc.truth.labels[i];
      const auto& type = sc.incidents.type_name(r);
      if (label == kNoise) {
        EXPECT_FALSE(failure_types.count(type)) << type;
        continue;
      }
      const auto& f = sc.truth.failures.at(static_cast<std::size_t>(label));
      EXPECT_TRUE(f.window.contains(r.minute));
      EXPECT_NE(std::find(f.affected.begin(), f.affected.end(), r.node), f.affected.end());
      EXPECT_FALSE(std::binary_search(f.silent.begin(), f.silent.end(), r.node));
      EXPECT_NE(std::find(f.vocabulary.begin(), f.vocabulary.end(), type), f.vocabulary.end());
    }
  }
}

TEST(Simulator, CascadesAreConnectedAndSilentNodesShowKpiAnomalies) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto cfg = small_config(seed);
    // 140-minute slots keep the previous pulse on a shared node out of the 120-minute KPI lookback.
    cfg.duration_minutes = cfg.first_failure_minute + 140 * cfg.n_failures;
    const auto sc = generate_scenario(cfg);
    for (const auto& f : sc.truth.failures) {
      ASSERT_FALSE(f.affected.empty());
      EXPECT_EQ(f.affected.front(), f.root);
      EXPECT_GE(static_cast<int>(f.affected.size()), cfg.min_affected);
      const std::set<NodeId> members(f.affected.begin(), f.affected.end());
      std::set<NodeId> reached{f.root};
      std::vector<NodeId> stack{f.root};
      while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        for (NodeId u : sc.topology.neighbors(v)) {
          if (members.count(u) && reached.insert(u).second) stack.push_back(u);
        }
      }
      EXPECT_EQ(reached, members);
      FailureWindow kpi_window{f.window.start, f.window.end + cfg.kpi_lag_max};
      for (NodeId s : f.silent) {
        EXPECT_FALSE(impact::abnormal_kpis(sc.kpis, kpi_window, impact::ImpactConfig{}, {s}).empty())
            << "failure " << f.id << " node " << sc.topology.name(s);
      }
    }
  }
}

TEST(Simulator, NoSilenceMeansEveryAffectedNodeReports) {
  auto cfg = small_config(2);
  cfg.silent_prob = 0.0;
  const auto sc = generate_scenario(cfg);
  std::vector<std::set<NodeId>> reporting(sc.truth.failures.size());
  for (std::size_t i = 0; i < sc.incidents.size(); ++i) {
    if (sc.truth.labels[i] != kNoise) reporting[sc.truth.labels[i]].insert(sc.incidents.records[i].node);
  }
  for (const auto& f : sc.truth.failures) {
    EXPECT_TRUE(f.silent.empty());
    EXPECT_EQ(reporting[f.id], std::set<NodeId>(f.affected.begin(), f.affected.end()));
  }
}

TEST(Simulator, OverlappingFailuresShareWindowsOnDisjointNodes) {
  auto cfg = small_config(3);
  cfg.failure_overlap = true;
  const auto sc = generate_scenario(cfg);
  EXPECT_EQ(sc.truth.windows().size(), 3u);
  for (std::size_t k = 0; k + 1 < sc.truth.failures.size(); k += 2) {
    const auto& a = sc.truth.failures[k];
    const auto& b = sc.truth.failures[k + 1];
    EXPECT_TRUE(a.window.overlaps(b.window));
    for (NodeId v : a.affected) EXPECT_EQ(std::find(b.affected.begin(), b.affected.end(), v), b.affected.end());
  }
}

TEST(LabelClustering, AlignsAndDropsNoise) {
  const std::vector<int> labels{0, kNoise, 1, 1, 0};
  std::vector<online::IncidentGroup> groups(2);
  groups[0].id = 7;
  groups[1].id = 8;
  for (std::size_t i : {0, 1, 4}) groups[0].members.push_back({i, {}, {}});
  for (std::size_t i : {2, 3}) groups[1].members.push_back({i, {}, {}});
  const auto a = label_clustering(groups, labels);
  EXPECT_EQ(a.clusters, (std::vector<int>{7, 7, 8, 8}));
  EXPECT_EQ(a.classes, (std::vector<int>{0, 0, 1, 1}));
  EXPECT_EQ(a.indices, (std::vector<std::size_t>{0, 4, 2, 3}));
  EXPECT_DOUBLE_EQ(metrics::nmi(a.clusters, a.classes), 1.0);

  std::vector<online::IncidentGroup> one(1);
  for (std::size_t i : {0, 2, 3, 4}) one[0].members.push_back({i, {}, {}});
  const auto mixed = label_clustering(one, labels);
  EXPECT_EQ(metrics::nmi(mixed.clusters, mixed.classes), 0.0);

  groups[1].members.push_back({9, {}, {}});
  EXPECT_THROW(label_clustering(groups, labels), LookupError);
}

TEST(ScenarioConfig, ReadsKeys) {
  std::istringstream in("seed=9\nsilent_prob=0.5\nvocabulary=tier\nn_failures=3\n");
  const auto cfg = scenario_config_from(KeyValueConfig::parse(in));
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.silent_prob, 0.5);
  EXPECT_EQ(cfg.vocabulary, VocabularyScope::kTier);
  EXPECT_EQ(cfg.n_failures, 3);
}

}  // namespace
}  // namespace incagg::sim
