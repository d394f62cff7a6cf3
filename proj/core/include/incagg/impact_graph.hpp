#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "incagg/evt.hpp"
#include "incagg/louvain.hpp"
#include "incagg/records.hpp"
#include "incagg/similarity.hpp"
#include "incagg/topology.hpp"

namespace incagg::impact {

struct ImpactConfig {
  /// Jaccard weight when both endpoints reported incidents.
  double alpha = 0.5;
  /// Minutes of KPI history before the window, for abnormality calibration
  /// and for trend comparison.
  Minute kpi_lookback = 120;
  detect::EvtConfig kpi_evt{.risk_q = 1e-3, .peak_frac = 0.1, .calib_n = 120, .min_peaks = 10};
  /// false reproduces the ablation: incident-reporting nodes only, and
  /// alpha applied to every edge.
  bool completion = true;
};

/// True if any point of the series inside `window` is anomalous for an EVT
/// detector calibrated on the preceding lookback.
bool kpi_abnormal(const KpiSeries& series, const FailureWindow& window, const ImpactConfig& cfg);

AbnormalKpis abnormal_kpis(const KpiStore& kpis, const FailureWindow& window, const ImpactConfig& cfg,
                           const std::set<NodeId>& nodes);

struct Candidates {
  std::set<NodeId> reporting;
  std::set<NodeId> silent;
  AbnormalKpis abnormal;

  std::set<NodeId> all() const;
};

/// Nodes reporting in the window, plus (with completion) silent nodes with an
/// abnormal KPI reachable from them through other admitted nodes.
Candidates candidate_nodes(const Topology& topo, const FailureWindow& window, const IncidentLog& log,
                           const KpiStore& kpis, const ImpactConfig& cfg);

struct SimilarityGraph {
  std::vector<NodeId> nodes;  // local vertex -> topology node
  WeightedGraph graph;        // only positive weights are stored
  std::vector<TypeMultiset> incidents;
};

SimilarityGraph build_similarity_graph(const Topology& topo, const FailureWindow& window,
                                       const IncidentLog& log, const KpiStore& kpis,
                                       const Candidates& candidates, const ImpactConfig& cfg);

/// One impact graph per community holding at least one incident.
std::vector<FailureImpactGraph> build_impact_graphs(const Topology& topo, const FailureWindow& window,
                                                    const IncidentLog& log, const KpiStore& kpis,
                                                    std::uint64_t seed, const ImpactConfig& cfg = {});

}  // namespace incagg::impact
