#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "incagg/interner.hpp"
#include "incagg/topology.hpp"

namespace incagg {

using Minute = std::int64_t;
using TypeId = std::uint32_t;

struct IncidentRecord {
  Minute minute = 0;
  NodeId node = 0;
  TypeId itype = 0;
  int severity = 0;

  bool operator==(const IncidentRecord&) const = default;
};

/// An incident stream sorted by minute (ties keep arrival order) together
/// with the interner for its incident types.
struct IncidentLog {
  Interner types;
  std::vector<IncidentRecord> records;

  /// Appends a record; throws ValidationError if it would break ordering.
  void append(Minute minute, NodeId node, std::string_view itype, int severity = 0);
  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  const std::string& type_name(const IncidentRecord& r) const { return types.name(r.itype); }

  /// Index range [first, last) of records with from <= minute <= to.
  std::pair<std::size_t, std::size_t> range(Minute from, Minute to) const;

  bool operator==(const IncidentLog&) const = default;
};

/// Throws ValidationError if the records are not sorted by minute or reference
/// unknown nodes or negative minutes.
void validate(const IncidentLog& log, const Topology& topo);

struct KpiSeries {
  NodeId node = 0;
  std::string kpi;
  Minute start_minute = 0;
  std::vector<double> values;

  Minute end_minute() const { return start_minute + static_cast<Minute>(values.size()) - 1; }
  bool operator==(const KpiSeries&) const = default;
};

/// Per-(node, kpi) series, at most one per pair.
class KpiStore {
 public:
  /// Throws ValidationError on empty or non-finite series and duplicates.
  void add(KpiSeries series);

  const std::vector<KpiSeries>& all() const noexcept { return series_; }
  /// Indices into all() for a node, ordered by kpi name.
  std::vector<std::size_t> for_node(NodeId node) const;
  const KpiSeries* find(NodeId node, const std::string& kpi) const;
  std::size_t size() const noexcept { return series_.size(); }

  bool operator==(const KpiStore& other) const { return series_ == other.series_; }

 private:
  std::vector<KpiSeries> series_;
  std::map<std::pair<NodeId, std::string>, std::size_t> index_;
};

/// Copies the values of `s` covering [from, to], clipped to the series extent.
std::vector<double> slice(const KpiSeries& s, Minute from, Minute to);

struct FailureWindow {
  Minute start = 0;
  Minute end = 0;

  bool contains(Minute m) const noexcept { return start <= m && m <= end; }
  bool overlaps(const FailureWindow& o) const noexcept { return start <= o.end && o.start <= end; }
  bool operator==(const FailureWindow&) const = default;
};

/// One community of a detected failure: its member nodes and the window
/// incidents those nodes reported.
struct FailureImpactGraph {
  FailureWindow window;
  std::vector<NodeId> nodes;                 // sorted
  std::vector<NodeId> boundary_nodes;        // sorted subset of nodes
  std::vector<std::size_t> incident_indices; // positions in the source log
  std::vector<IncidentRecord> incidents;     // same order as incident_indices

  bool operator==(const FailureImpactGraph&) const = default;
};

}  // namespace incagg
