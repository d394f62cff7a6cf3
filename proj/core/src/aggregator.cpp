#include "incagg/aggregator.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "incagg/detector.hpp"
#include "incagg/error.hpp"

namespace incagg::online {

void validate(const AggregatorConfig& cfg) {
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) throw ValidationError("lambda must lie in [0, 1]");
  if (cfg.tau <= 0) throw ValidationError("tau must be positive");
}

std::optional<double> historical_closeness(const IncidentEmbedding& emb, std::string_view i,
                                           std::string_view j) {
  const auto ri = emb.find(i);
  const auto rj = emb.find(j);
  if (!ri || !rj) return std::nullopt;
  return cosine(emb.row(*ri), emb.row(*rj));
}

double topological_rescaling(std::uint32_t hops, int tau) {
  const auto excess = static_cast<double>(hops) - static_cast<double>(tau);
  return 1.0 / std::max(1.0, excess);
}

std::optional<double> similarity(const IncidentEmbedding& emb, std::string_view type_i, NodeId node_i,
                                 std::string_view type_j, NodeId node_j, const Topology& topo,
                                 const AggregatorConfig& cfg) {
  const auto hc = historical_closeness(emb, type_i, type_j);
  if (!hc) return std::nullopt;
  const auto hops = shortest_hop_distance(topo, node_i, node_j);
  if (!hops) return 0.0;
  return topological_rescaling(*hops, cfg.tau) * *hc;
}

int decide_correlation(std::optional<double> sim, const AggregatorConfig& cfg) {
  return sim && *sim >= cfg.lambda ? 1 : 0;
}

OnlineAggregator::OnlineAggregator(const Topology& topo, const IncidentEmbedding& emb, const Interner& types,
                                   detect::EvtDetector detector, AggregatorConfig cfg)
    : topo_(&topo), emb_(&emb), cfg_(cfg), detector_(std::move(detector)), hops_(topo) {
  validate(cfg_);
  if (!detector_.calibrated()) throw ValidationError("aggregator needs a calibrated detector");
  type_rows_.reserve(types.size());
  for (const auto& name : types.names()) type_rows_.push_back(emb.find(name));
}

std::optional<double> OnlineAggregator::pair_similarity(NodeId a, std::optional<std::size_t> row_a, NodeId b,
                                                        std::optional<std::size_t> row_b) {
  if (!row_a || !row_b) return std::nullopt;
  const auto hops = hops_.distance(a, b);
  if (!hops) return 0.0;
  return topological_rescaling(*hops, cfg_.tau) * cosine(emb_->row(*row_a), emb_->row(*row_b));
}

std::optional<double> OnlineAggregator::incident_to_group_similarity(const IncidentRecord& incident,
                                                                     const IncidentGroup& group) {
  const auto row = incident.itype < type_rows_.size() ? type_rows_[incident.itype] : std::nullopt;
  std::optional<double> best;
  for (const auto& m : group.members) {
    const auto s = pair_similarity(incident.node, row, m.record.node, m.embedding_row);
    if (s && (!best || *s > *best)) best = s;
  }
  return best;
}

void OnlineAggregator::place(const IncidentRecord& record, std::size_t index) {
  if (record.itype >= type_rows_.size()) throw LookupError("incident type id outside the type table");
  GroupMember member{index, record, type_rows_[record.itype]};
  IncidentGroup* target = nullptr;
  if (member.embedding_row) {
    double best = 0.0;
    for (auto& g : open_) {
      const auto s = incident_to_group_similarity(record, g);
      // open_ is in id order, so a strict comparison keeps the older group on ties.
      if (decide_correlation(s, cfg_) && (!target || *s > best)) {
        target = &g;
        best = *s;
      }
    }
  }
  if (target == nullptr) {
    open_.push_back(IncidentGroup{next_id_++, FailureWindow{window_start_, window_start_}, {}});
    target = &open_.back();
  }
  target->members.push_back(std::move(member));
}

void OnlineAggregator::close_window() {
  for (auto& g : open_) {
    g.window = FailureWindow{window_start_, last_minute_};
    done_.push_back(std::move(g));
  }
  open_.clear();
  active_ = false;
}

void OnlineAggregator::on_minute(Minute minute, std::span<const IncidentRecord> incidents,
                                 std::size_t first_index, bool group) {
  if (prev_minute_ && minute <= *prev_minute_) throw ValidationError("minutes must be strictly increasing");
  prev_minute_ = minute;
  for (const auto& r : incidents) {
    if (r.minute != minute) throw ValidationError("incident minute differs from the fed minute");
  }
  const auto verdict = detector_.observe(static_cast<double>(incidents.size()));
  if (verdict == detect::Verdict::kNormal) {
    if (active_) close_window();
    return;
  }
  if (!active_) {
    active_ = true;
    window_start_ = minute;
  }
  last_minute_ = minute;
  if (!group) return;
  for (std::size_t k = 0; k < incidents.size(); ++k) place(incidents[k], first_index + k);
}

std::vector<IncidentGroup> OnlineAggregator::finish() {
  if (active_) close_window();
  std::vector<IncidentGroup> out = std::move(done_);
  done_.clear();
  return out;
}

std::vector<IncidentGroup> aggregate_stream(const IncidentLog& log, const IncidentEmbedding& emb,
                                            const Topology& topo, const AggregateOptions& opts) {
  detect::validate(opts.evt);
  validate(opts.agg);
  if (log.records.empty() && opts.to < opts.from) return {};
  const Minute to = opts.to < opts.from ? log.records.back().minute : opts.to;
  const auto counts = detect::count_per_minute(log.records, opts.from, to);
  if (counts.size() < opts.evt.calib_n) {
    throw ValidationError("stream shorter than the detector calibration period");
  }
  std::vector<double> calib(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(opts.evt.calib_n));
  detect::EvtDetector detector(opts.evt);
  detector.calibrate(calib);

  OnlineAggregator agg(topo, emb, log.types, std::move(detector), opts.agg);
  const std::span<const IncidentRecord> all(log.records);
  for (Minute m = opts.from + static_cast<Minute>(opts.evt.calib_n); m <= to; ++m) {
    const auto [first, last] = log.range(m, m);
    agg.on_minute(m, all.subspan(first, last - first), first, m >= opts.group_from);
  }
  return agg.finish();
}

void write_groups(std::ostream& out, const std::vector<IncidentGroup>& groups, const Topology& topo,
                  const Interner& types) {
  for (const auto& g : groups) {
    for (const auto& m : g.members) {
      out << g.id << ',' << m.record.minute << ',' << topo.name(m.record.node) << ','
          << types.name(m.record.itype) << '\n';
    }
  }
}

void save_groups(const std::filesystem::path& path, const std::vector<IncidentGroup>& groups,
                 const Topology& topo, const Interner& types) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_groups(out, groups, topo, types);
  if (!out) throw Error("failed writing " + path.string());
}

namespace {

template <typename T>
T parse_field(const std::string& text, const std::string& source, std::size_t line, const char* what) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw ParseError(source, line, std::string("bad ") + what + " '" + text + "'");
  return value;
}

}  // namespace

std::vector<GroupRow> read_groups(std::istream& in, const std::string& source) {
  std::vector<GroupRow> rows;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty() || text.front() == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) f.push_back(part);
    if (f.size() != 4) throw ParseError(source, line, "expected group_id,minute,node,incident_type");
    if (f[2].empty() || f[3].empty()) throw ParseError(source, line, "empty node or incident type");
    rows.push_back(GroupRow{parse_field<int>(f[0], source, line, "group id"),
                            parse_field<Minute>(f[1], source, line, "minute"), f[2], f[3]});
  }
  return rows;
}

std::vector<GroupRow> load_groups(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_groups(in, path.string());
}

std::vector<std::size_t> resolve_group_rows(const std::vector<GroupRow>& rows, const IncidentLog& log,
                                            const Topology& topo) {
  using Key = std::tuple<Minute, std::string, std::string>;
  std::map<Key, std::vector<std::size_t>> pending;
  for (std::size_t i = log.records.size(); i-- > 0;) {
    const auto& r = log.records[i];
    pending[Key{r.minute, topo.name(r.node), log.type_name(r)}].push_back(i);
  }
  std::vector<std::size_t> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    auto it = pending.find(Key{row.minute, row.node, row.itype});
    if (it == pending.end() || it->second.empty()) {
      throw LookupError("group row " + std::to_string(row.minute) + "," + row.node + "," + row.itype +
                        " matches no unused incident");
    }
    out.push_back(it->second.back());
    it->second.pop_back();
  }
  return out;
}

}  // namespace incagg::online
