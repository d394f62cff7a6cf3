#include "incagg/records.hpp"

#include <algorithm>
#include <cmath>

#include "incagg/error.hpp"

namespace incagg {

void IncidentLog::append(Minute minute, NodeId node, std::string_view itype, int severity) {
  if (minute < 0) throw ValidationError("negative incident minute");
  if (!records.empty() && minute < records.back().minute) {
    throw ValidationError("incident stream is not sorted by minute");
  }
  records.push_back({minute, node, types.intern(itype), severity});
}

std::pair<std::size_t, std::size_t> IncidentLog::range(Minute from, Minute to) const {
  auto lo = std::lower_bound(records.begin(), records.end(), from,
                             [](const IncidentRecord& r, Minute m) { return r.minute < m; });
  auto hi = std::upper_bound(records.begin(), records.end(), to,
                             [](Minute m, const IncidentRecord& r) { return m < r.minute; });
  if (hi < lo) hi = lo;
  return {static_cast<std::size_t>(lo - records.begin()), static_cast<std::size_t>(hi - records.begin())};
}

void validate(const IncidentLog& log, const Topology& topo) {
  Minute prev = 0;
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const auto& r = log.records[i];
    if (r.minute < 0) throw ValidationError("incident " + std::to_string(i) + " has a negative minute");
    if (i > 0 && r.minute < prev) throw ValidationError("incident stream is not sorted by minute");
    if (!topo.contains(r.node)) throw ValidationError("incident " + std::to_string(i) + " references an unknown node");
    if (r.itype >= log.types.size()) throw ValidationError("incident " + std::to_string(i) + " has an unknown type");
    prev = r.minute;
  }
}

void KpiStore::add(KpiSeries series) {
  if (series.values.empty()) throw ValidationError("KPI series '" + series.kpi + "' is empty");
  for (double v : series.values) {
    if (!std::isfinite(v)) throw ValidationError("KPI series '" + series.kpi + "' has a non-finite value");
  }
  auto key = std::make_pair(series.node, series.kpi);
  if (index_.count(key)) throw ValidationError("duplicate KPI series '" + series.kpi + "'");
  index_.emplace(std::move(key), series_.size());
  series_.push_back(std::move(series));
}

std::vector<std::size_t> KpiStore::for_node(NodeId node) const {
  std::vector<std::size_t> out;
  for (auto it = index_.lower_bound({node, std::string()}); it != index_.end() && it->first.first == node; ++it) {
    out.push_back(it->second);
  }
  return out;
}

const KpiSeries* KpiStore::find(NodeId node, const std::string& kpi) const {
  auto it = index_.find({node, kpi});
  return it == index_.end() ? nullptr : &series_[it->second];
}

std::vector<double> slice(const KpiSeries& s, Minute from, Minute to) {
  const Minute lo = std::max(from, s.start_minute);
  const Minute hi = std::min(to, s.end_minute());
  if (hi < lo) return {};
  const auto first = s.values.begin() + (lo - s.start_minute);
  return {first, first + (hi - lo + 1)};
}

}  // namespace incagg
