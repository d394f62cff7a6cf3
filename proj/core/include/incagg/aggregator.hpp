#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "incagg/embedding.hpp"
#include "incagg/evt.hpp"
#include "incagg/records.hpp"
#include "incagg/topology.hpp"

namespace incagg::online {

struct AggregatorConfig {
  double lambda = 0.7;  // correlation threshold on sim
  int tau = 4;          // hop distance free of penalty; 3..6 behave alike
};

void validate(const AggregatorConfig& cfg);

/// Cosine of the two type vectors; nullopt when either type is out of
/// vocabulary.
std::optional<double> historical_closeness(const IncidentEmbedding& emb, std::string_view i,
                                           std::string_view j);

/// 1 / max(1, d - tau).
double topological_rescaling(std::uint32_t hops, int tau);

/// TR(d) * HC. nullopt for out-of-vocabulary types; 0 for nodes in
/// different components.
std::optional<double> similarity(const IncidentEmbedding& emb, std::string_view type_i, NodeId node_i,
                                 std::string_view type_j, NodeId node_j, const Topology& topo,
                                 const AggregatorConfig& cfg);

/// 1 iff sim >= lambda; undefined similarity is 0.
int decide_correlation(std::optional<double> sim, const AggregatorConfig& cfg);

struct GroupMember {
  std::size_t index = 0;  // position in the source log
  IncidentRecord record;
  std::optional<std::size_t> embedding_row;
};

struct IncidentGroup {
  int id = 0;
  FailureWindow window;
  std::vector<GroupMember> members;  // arrival order
};

/// Streaming grouper for one partition. Incidents are fed minute by minute;
/// the minute's count goes through the EVT detector first, and only
/// incidents of anomalous minutes are grouped. A normal minute closes the
/// active window and finalises its groups.
class OnlineAggregator {
 public:
  /// `detector` must already be calibrated. `types` names the log's type ids.
  OnlineAggregator(const Topology& topo, const IncidentEmbedding& emb, const Interner& types,
                   detect::EvtDetector detector, AggregatorConfig cfg = {});

  /// Processes one minute; minutes must be strictly increasing and every
  /// minute should be fed, including empty ones. `group` false lets the detector observe without
  /// grouping, e.g. for history before the evaluation period.
  void on_minute(Minute minute, std::span<const IncidentRecord> incidents, std::size_t first_index,
                 bool group = true);
  /// Closes any active window and returns every finalised group.
  std::vector<IncidentGroup> finish();

  /// Similarity of an incident to a group: max over members.
  std::optional<double> incident_to_group_similarity(const IncidentRecord& incident,
                                                     const IncidentGroup& group);

  bool window_active() const noexcept { return active_; }
  const detect::EvtDetector& detector() const noexcept { return detector_; }

 private:
  std::optional<double> pair_similarity(NodeId a, std::optional<std::size_t> row_a, NodeId b,
                                        std::optional<std::size_t> row_b);
  void place(const IncidentRecord& record, std::size_t index);
  void close_window();

  const Topology* topo_;
  const IncidentEmbedding* emb_;
  AggregatorConfig cfg_;
  detect::EvtDetector detector_;
  HopDistanceCache hops_;
  std::vector<std::optional<std::size_t>> type_rows_;
  bool active_ = false;
  std::optional<Minute> prev_minute_;
  Minute window_start_ = 0;
  Minute last_minute_ = 0;
  std::vector<IncidentGroup> open_;
  std::vector<IncidentGroup> done_;
  int next_id_ = 0;
};

struct AggregateOptions {
  detect::EvtConfig evt;
  AggregatorConfig agg;
  Minute from = 0;            // first minute counted by the detector
  Minute to = -1;             // < from: last incident minute
  Minute group_from = 0;      // minutes before this are observed but not grouped
};

/// Calibrates on the first evt.calib_n minutes of [from, to] and streams the
/// rest through an OnlineAggregator.
std::vector<IncidentGroup> aggregate_stream(const IncidentLog& log, const IncidentEmbedding& emb,
                                            const Topology& topo, const AggregateOptions& opts);

/// `group_id,minute,node,incident_type` lines in group then arrival order.
void write_groups(std::ostream& out, const std::vector<IncidentGroup>& groups, const Topology& topo,
                  const Interner& types);
void save_groups(const std::filesystem::path& path, const std::vector<IncidentGroup>& groups,
                 const Topology& topo, const Interner& types);

/// Parsed groups-file row.
struct GroupRow {
  int group_id = 0;
  Minute minute = 0;
  std::string node;
  std::string itype;
};
std::vector<GroupRow> read_groups(std::istream& in, const std::string& source = "<groups>");
std::vector<GroupRow> load_groups(const std::filesystem::path& path);

/// Maps each row back to a distinct incident index of `log` (identical
/// records are matched in order). Throws LookupError for unmatched rows.
std::vector<std::size_t> resolve_group_rows(const std::vector<GroupRow>& rows, const IncidentLog& log,
                                            const Topology& topo);

}  // namespace incagg::online
