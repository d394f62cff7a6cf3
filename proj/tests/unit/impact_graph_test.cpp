#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "incagg/impact_graph.hpp"
#include "incagg/simulator.hpp"

namespace incagg::impact {
namespace {

constexpr Minute kHorizon = 200;
const FailureWindow kWindow{150, 155};

std::vector<double> kpi_values(std::uint64_t seed, bool spike) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> v(kHorizon);
  for (Minute m = 0; m < kHorizon; ++m) {
    v[m] = 20.0 + noise(rng);
    if (spike && kWindow.contains(m)) v[m] += 40.0;
  }
  return v;
}

// Path topology a - b - c - d with one CPU series per node.
struct Fixture {
  Topology topo;
  IncidentLog log;
  KpiStore kpis;

  explicit Fixture(std::vector<bool> spikes) {
    for (const char* n : {"a", "b", "c", "d"}) topo.add_node(n);
    topo.add_edge(0, 1);
    topo.add_edge(1, 2);
    topo.add_edge(2, 3);
    for (NodeId n = 0; n < 4; ++n) kpis.add(KpiSeries{n, "cpu", 0, kpi_values(n + 1, spikes[n])});
  }
};

TEST(CandidateNodes, EmptyWindowGivesNothing) {
  Fixture f({true, true, true, true});
  const auto c = candidate_nodes(f.topo, kWindow, f.log, f.kpis, {});
  EXPECT_TRUE(c.all().empty());
  EXPECT_TRUE(build_impact_graphs(f.topo, kWindow, f.log, f.kpis, 1).empty());
}

TEST(CandidateNodes, AbnormalNodeWithoutAdmittedNeighbourIsExcluded) {
  Fixture f({true, false, true, true});
  f.log.append(151, 0, "x");
  const auto c = candidate_nodes(f.topo, kWindow, f.log, f.kpis, {});
  EXPECT_EQ(c.reporting, (std::set<NodeId>{0}));
  EXPECT_TRUE(c.silent.empty());
}

TEST(CandidateNodes, SilentAdmissionIsTransitive) {
  Fixture f({true, true, true, false});
  f.log.append(151, 0, "x");
  const auto c = candidate_nodes(f.topo, kWindow, f.log, f.kpis, {});
  EXPECT_EQ(c.silent, (std::set<NodeId>{1, 2}));
  EXPECT_TRUE(c.abnormal.count(0));
  ImpactConfig off;
  off.completion = false;
  EXPECT_TRUE(candidate_nodes(f.topo, kWindow, f.log, f.kpis, off).silent.empty());
}

// A silent bridge with an abnormal KPI joins the two reporting nodes it
// connects into one impact graph; without completion they stay apart.
TEST(BuildImpactGraphs, SilentBridgeCompletesTheGraph) {
  Fixture f({true, true, true, false});
  f.log.append(150, 0, "x");
  f.log.append(151, 2, "y");
  f.log.append(152, 0, "x");
  const auto graphs = build_impact_graphs(f.topo, kWindow, f.log, f.kpis, 3);
  ASSERT_EQ(graphs.size(), 1u);
  EXPECT_EQ(graphs[0].nodes, (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(graphs[0].incident_indices, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(graphs[0].window, kWindow);

  ImpactConfig off;
  off.completion = false;
  const auto split = build_impact_graphs(f.topo, kWindow, f.log, f.kpis, 3, off);
  ASSERT_EQ(split.size(), 2u);
  EXPECT_EQ(split[0].nodes, (std::vector<NodeId>{0}));
  EXPECT_EQ(split[1].nodes, (std::vector<NodeId>{2}));
}

TEST(SimilarityGraph, WeightsAreSymmetricBoundedAndFollowTheAlphaRule) {
  Fixture f({true, true, true, false});
  f.log.append(150, 0, "x");
  f.log.append(151, 1, "x");
  f.log.append(151, 1, "z");
  const ImpactConfig cfg;
  const auto c = candidate_nodes(f.topo, kWindow, f.log, f.kpis, cfg);
  const auto sg = build_similarity_graph(f.topo, kWindow, f.log, f.kpis, c, cfg);
  ASSERT_EQ(sg.nodes, (std::vector<NodeId>{0, 1, 2}));
  for (std::uint32_t v = 0; v < sg.nodes.size(); ++v) {
    for (const auto& [u, w] : sg.graph.neighbors(v)) {
      EXPECT_TRUE(f.topo.adjacent(sg.nodes[v], sg.nodes[u]));
      EXPECT_GT(w, 0.0);
      EXPECT_LE(w, 1.0);
      EXPECT_EQ(w, sg.graph.weight(u, v));
    }
  }
  const Minute from = kWindow.start - cfg.kpi_lookback;
  const double trend01 = kpi_trend_similarity(0, 1, from, kWindow.end, f.kpis, c.abnormal);
  const double trend12 = kpi_trend_similarity(1, 2, from, kWindow.end, f.kpis, c.abnormal);
  EXPECT_DOUBLE_EQ(sg.graph.weight(0, 1), 0.5 * 0.5 + 0.5 * trend01);
  EXPECT_DOUBLE_EQ(sg.graph.weight(1, 2), trend12);
}

struct Purity {
  std::size_t graphs = 0;
  std::size_t failure_incidents = 0;
  std::size_t contaminating = 0;
  std::map<int, std::size_t> largest_share;
};

Purity measure(const std::vector<FailureImpactGraph>& graphs, const std::vector<int>& labels) {
  Purity p;
  p.graphs = graphs.size();
  for (const auto& g : graphs) {
    std::map<int, std::size_t> count;
    for (auto i : g.incident_indices) {
      if (labels[i] != sim::kNoise) ++count[labels[i]];
    }
    std::size_t total = 0, top = 0;
    for (const auto& [label, n] : count) {
      total += n;
      top = std::max(top, n);
      p.largest_share[label] = std::max(p.largest_share[label], n);
    }
    p.failure_incidents += total;
    p.contaminating += total - top;
  }
  return p;
}

std::size_t labeled(const std::vector<int>& labels, int id) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), id));
}

// One-hop cascades: a root and the neighbours it drags down. Deeper,
// tree-shaped cascades are split by modularity maximisation.
sim::ScenarioConfig shallow_cascades() {
  sim::ScenarioConfig cfg;
  cfg.noise_rate = 0.002;
  cfg.duration_minutes = 600;
  cfg.max_hops = 1;
  cfg.min_affected = 4;
  cfg.incidents_per_failure_node = 20;
  cfg.failure_minutes = 6;
  cfg.kpi_lag_max = 3;
  return cfg;
}

TEST(BuildImpactGraphs, SinglePlantedFailureStaysTogether) {
  auto cfg = shallow_cascades();
  cfg.n_failures = 1;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cfg.seed = seed;
    const auto sc = sim::generate_scenario(cfg);
    const auto graphs =
        build_impact_graphs(sc.topology, sc.truth.failures[0].window, sc.incidents, sc.kpis, seed);
    const auto p = measure(graphs, sc.truth.labels);
    EXPECT_GE(static_cast<double>(p.largest_share.at(0)), 0.9 * labeled(sc.truth.labels, 0)) << "seed " << seed;
  }
}

TEST(BuildImpactGraphs, SimultaneousFailuresSeparate) {
  auto cfg = shallow_cascades();
  cfg.n_failures = 2;
  cfg.failure_overlap = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cfg.seed = seed;
    const auto sc = sim::generate_scenario(cfg);
    const auto windows = sc.truth.windows();
    ASSERT_EQ(windows.size(), 1u);
    const auto graphs = build_impact_graphs(sc.topology, windows[0], sc.incidents, sc.kpis, seed);
    const auto p = measure(graphs, sc.truth.labels);
    EXPECT_GE(p.graphs, 2u) << "seed " << seed;
    EXPECT_LT(static_cast<double>(p.contaminating), 0.1 * p.failure_incidents) << "seed " << seed;
  }
}

TEST(BuildImpactGraphs, NoiseOnlyWindowStillEmitsGraphs) {
  sim::ScenarioConfig cfg;
  cfg.n_failures = 1;
  cfg.noise_rate = 0.05;
  cfg.duration_minutes = 600;
  const auto sc = sim::generate_scenario(cfg);
  const FailureWindow quiet{200, 205};
  const auto graphs = build_impact_graphs(sc.topology, quiet, sc.incidents, sc.kpis, 1);
  EXPECT_FALSE(graphs.empty());
  std::size_t incidents = 0;
  for (const auto& g : graphs) incidents += g.incidents.size();
  const auto [first, last] = sc.incidents.range(quiet.start, quiet.end);
  EXPECT_EQ(incidents, last - first);
}

TEST(BuildImpactGraphs, Deterministic) {
  sim::ScenarioConfig cfg;
  cfg.n_failures = 1;
  cfg.duration_minutes = 600;
  const auto sc = sim::generate_scenario(cfg);
  const auto w = sc.truth.failures[0].window;
  EXPECT_EQ(build_impact_graphs(sc.topology, w, sc.incidents, sc.kpis, 9),
            build_impact_graphs(sc.topology, w, sc.incidents, sc.kpis, 9));
}

}  // namespace
}  // namespace incagg::impact
