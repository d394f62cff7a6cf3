#include "incagg/impact_graph.hpp"

#include <algorithm>
#include <map>

#include "incagg/error.hpp"

namespace incagg::impact {

bool kpi_abnormal(const KpiSeries& series, const FailureWindow& window, const ImpactConfig& cfg) {
  const auto history = slice(series, window.start - cfg.kpi_lookback, window.start - 1);
  if (history.size() < cfg.kpi_evt.min_peaks) return false;
  detect::EvtConfig evt = cfg.kpi_evt;
  evt.calib_n = std::min(evt.calib_n, history.size());
  detect::EvtDetector detector(evt);
  detector.calibrate(history);
  for (double x : slice(series, window.start, window.end)) {
    if (detector.observe(x) == detect::Verdict::kAnomalous) return true;
  }
  return false;
}

AbnormalKpis abnormal_kpis(const KpiStore& kpis, const FailureWindow& window, const ImpactConfig& cfg,
                           const std::set<NodeId>& nodes) {
  AbnormalKpis out;
  for (NodeId v : nodes) {
    for (auto idx : kpis.for_node(v)) {
      const auto& s = kpis.all()[idx];
      if (kpi_abnormal(s, window, cfg)) out[v].insert(s.kpi);
    }
  }
  return out;
}

std::set<NodeId> Candidates::all() const {
  std::set<NodeId> out = reporting;
  out.insert(silent.begin(), silent.end());
  return out;
}

Candidates candidate_nodes(const Topology& topo, const FailureWindow& window, const IncidentLog& log,
                           const KpiStore& kpis, const ImpactConfig& cfg) {
  Candidates c;
  const auto [first, last] = log.range(window.start, window.end);
  for (std::size_t i = first; i < last; ++i) c.reporting.insert(log.records[i].node);
  c.abnormal = abnormal_kpis(kpis, window, cfg, c.reporting);
  if (!cfg.completion) return c;

  // Silent nodes join when adjacent to an admitted node and abnormal
  // themselves; admission is transitive.
  std::set<NodeId> rejected;
  std::vector<NodeId> frontier(c.reporting.begin(), c.reporting.end());
  while (!frontier.empty()) {
    const NodeId v = frontier.back();
    frontier.pop_back();
    for (NodeId u : topo.neighbors(v)) {
      if (c.reporting.count(u) || c.silent.count(u) || rejected.count(u)) continue;
      auto found = abnormal_kpis(kpis, window, cfg, {u});
      if (found.empty()) {
        rejected.insert(u);
        continue;
      }
      c.abnormal.insert(found.begin(), found.end());
      c.silent.insert(u);
      frontier.push_back(u);
    }
  }
  return c;
}

SimilarityGraph build_similarity_graph(const Topology& topo, const FailureWindow& window, const IncidentLog& log,
                                       const KpiStore& kpis, const Candidates& candidates, const ImpactConfig& cfg) {
  SimilarityGraph sg;
  const auto members = candidates.all();
  sg.nodes.assign(members.begin(), members.end());
  sg.graph = WeightedGraph(sg.nodes.size());
  std::map<NodeId, std::uint32_t> local;
  for (std::uint32_t i = 0; i < sg.nodes.size(); ++i) local[sg.nodes[i]] = i;

  std::vector<std::vector<TypeId>> types(sg.nodes.size());
  const auto [first, last] = log.range(window.start, window.end);
  for (std::size_t i = first; i < last; ++i) {
    const auto& r = log.records[i];
    if (auto it = local.find(r.node); it != local.end()) types[it->second].push_back(r.itype);
  }
  sg.incidents.reserve(types.size());
  for (const auto& t : types) sg.incidents.push_back(make_multiset(t));

  const Minute from = window.start - cfg.kpi_lookback;
  for (std::uint32_t a = 0; a < sg.nodes.size(); ++a) {
    for (NodeId nb : topo.neighbors(sg.nodes[a])) {
      auto it = local.find(nb);
      if (it == local.end() || it->second <= a) continue;
      const std::uint32_t b = it->second;
      const bool both_report = !sg.incidents[a].empty() && !sg.incidents[b].empty();
      const double alpha = (!cfg.completion || both_report) ? cfg.alpha : 0.0;
      const double jac = alpha > 0.0 ? incident_similarity(sg.incidents[a], sg.incidents[b]) : 0.0;
      const double trend =
          alpha < 1.0 ? kpi_trend_similarity(sg.nodes[a], nb, from, window.end, kpis, candidates.abnormal) : 0.0;
      const double w = edge_weight(jac, trend, alpha);
      if (w > 0.0) sg.graph.add_edge(a, b, w);
    }
  }
  return sg;
}

namespace {

// Louvain can leave a community internally disconnected; such a community is
// split into its connected pieces, which never lowers modularity.
Partition split_disconnected(const WeightedGraph& g, const Partition& part) {
  Partition out(part.size(), UINT32_MAX);
  std::uint32_t next = 0;
  std::vector<std::uint32_t> stack;
  for (std::uint32_t s = 0; s < part.size(); ++s) {
    if (out[s] != UINT32_MAX) continue;
    out[s] = next;
    stack.assign(1, s);
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (const auto& [u, w] : g.neighbors(v)) {
        if (w > 0.0 && part[u] == part[v] && out[u] == UINT32_MAX) {
          out[u] = next;
          stack.push_back(u);
        }
      }
    }
    ++next;
  }
  return out;
}

}  // namespace

std::vector<FailureImpactGraph> build_impact_graphs(const Topology& topo, const FailureWindow& window,
                                                    const IncidentLog& log, const KpiStore& kpis, std::uint64_t seed,
                                                    const ImpactConfig& cfg) {
  const auto candidates = candidate_nodes(topo, window, log, kpis, cfg);
  if (candidates.reporting.empty()) return {};
  const auto sg = build_similarity_graph(topo, window, log, kpis, candidates, cfg);
  const Partition part = split_disconnected(sg.graph, louvain(sg.graph, seed));
  const std::uint32_t count = part.empty() ? 0 : *std::max_element(part.begin(), part.end()) + 1;

  std::vector<FailureImpactGraph> graphs(count);
  std::vector<int> community_of(topo.node_count(), -1);
  for (std::uint32_t v = 0; v < sg.nodes.size(); ++v) {
    graphs[part[v]].nodes.push_back(sg.nodes[v]);
    community_of[sg.nodes[v]] = static_cast<int>(part[v]);
    bool boundary = false;
    for (const auto& [u, w] : sg.graph.neighbors(v)) {
      if (w > 0.0 && part[u] != part[v]) boundary = true;
    }
    if (boundary) graphs[part[v]].boundary_nodes.push_back(sg.nodes[v]);
  }
  const auto [first, last] = log.range(window.start, window.end);
  for (std::size_t i = first; i < last; ++i) {
    const int c = community_of[log.records[i].node];
    if (c < 0) continue;
    graphs[c].incident_indices.push_back(i);
    graphs[c].incidents.push_back(log.records[i]);
  }

  std::vector<FailureImpactGraph> out;
  for (auto& g : graphs) {
    if (g.incidents.empty()) continue;
    g.window = window;
    std::sort(g.nodes.begin(), g.nodes.end());
    std::sort(g.boundary_nodes.begin(), g.boundary_nodes.end());
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace incagg::impact
