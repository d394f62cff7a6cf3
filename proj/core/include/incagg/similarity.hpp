#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "incagg/records.hpp"

namespace incagg::impact {

/// Incident type -> multiplicity.
using TypeMultiset = std::map<TypeId, int>;

TypeMultiset make_multiset(std::span<const TypeId> types);

/// Multiset Jaccard: sum_t min(m_i, m_j) / sum_t max(m_i, m_j); 0 when both
/// are empty.
double incident_similarity(const TypeMultiset& a, const TypeMultiset& b);

/// Dynamic time warping with |u_i - v_j| local cost over the full window,
/// divided by the number of cells on the warping path. Among paths of equal
/// cost the shortest is taken. Throws ValidationError on empty input.
double dtw_distance(std::span<const double> u, std::span<const double> v);

/// (x - mean) / stddev; all zeros when the series is constant.
std::vector<double> z_normalize(std::span<const double> x);

/// Abnormal KPI names per node inside one failure window.
using AbnormalKpis = std::map<NodeId, std::set<std::string>>;

/// Mean over KPIs abnormal at both nodes of 1 / (1 + dtw) on z-normalised
/// series covering [from, to]; 0 when no KPI is shared.
double kpi_trend_similarity(NodeId i, NodeId j, Minute from, Minute to, const KpiStore& kpis,
                            const AbnormalKpis& abnormal);

/// alpha * jaccard + (1 - alpha) * dtw_similarity.
double edge_weight(double jaccard, double dtw_similarity, double alpha);

}  // namespace incagg::impact
