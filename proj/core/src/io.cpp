#include "incagg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "incagg/error.hpp"

namespace incagg::io {
namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

// Strips a trailing '\r' so CRLF files still parse.
std::string_view chomp(const std::string& line) {
  std::string_view v(line);
  if (!v.empty() && v.back() == '\r') v.remove_suffix(1);
  return v;
}

template <typename T>
T parse_number(std::string_view text, const std::string& source, std::size_t line, const char* what) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw ParseError(source, line, std::string("invalid ") + what + " '" + std::string(text) + "'");
  }
  return value;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

void check_written(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

NodeId node_at(const Topology& topo, std::string_view name, const std::string& source, std::size_t line) {
  if (auto id = topo.find(name)) return *id;
  throw ParseError(source, line, "unknown node '" + std::string(name) + "'");
}

}  // namespace

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error("cannot format real");
  return std::string(buf, ptr);
}

std::string format_float(float value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(value));
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  auto out = open_out(path);
  out << contents;
  check_written(out, path);
}

// ---------------------------------------------------------------- topology

Topology read_topology(std::istream& in, const std::string& source) {
  Topology topo;
  struct PendingEdge {
    std::string a, b;
    std::size_t line;
  };
  std::vector<PendingEdge> edges;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = chomp(raw);
    if (text.empty()) continue;
    const auto f = split(text, ',');
    if (f[0] == "N") {
      if (f.size() != 3) throw ParseError(source, line, "node line needs N,<node_id>,<layer>");
      try {
        topo.add_node(f[1], parse_layer(f[2]));
      } catch (const ValidationError& e) {
        throw ParseError(source, line, e.what());
      }
    } else if (f[0] == "E") {
      if (f.size() != 3) throw ParseError(source, line, "edge line needs E,<src>,<dst>");
      edges.push_back({std::string(f[1]), std::string(f[2]), line});
    } else {
      throw ParseError(source, line, "unknown record kind '" + std::string(f[0]) + "'");
    }
  }
  for (const auto& e : edges) {
    auto a = topo.find(e.a);
    auto b = topo.find(e.b);
    if (!a || !b) {
      throw ValidationError(source + ":" + std::to_string(e.line) + ": edge endpoint '" + (a ? e.b : e.a) +
                            "' is not a declared node");
    }
    if (*a == *b) throw ValidationError(source + ":" + std::to_string(e.line) + ": self-loop on '" + e.a + "'");
    topo.add_edge(*a, *b);
  }
  return topo;
}

void write_topology(std::ostream& out, const Topology& topo) {
  for (NodeId v = 0; v < topo.node_count(); ++v) {
    out << "N," << topo.name(v) << ',' << to_string(topo.layer(v)) << '\n';
  }
  for (auto [a, b] : topo.edges()) out << "E," << topo.name(a) << ',' << topo.name(b) << '\n';
}

Topology load_topology(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_topology(in, path.string());
}

void save_topology(const std::filesystem::path& path, const Topology& topo) {
  auto out = open_out(path);
  write_topology(out, topo);
  check_written(out, path);
}

// --------------------------------------------------------------- incidents

IncidentLog read_incidents(std::istream& in, const Topology& topo, const std::string& source) {
  IncidentLog log;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = chomp(raw);
    if (text.empty()) continue;
    const auto f = split(text, ',');
    if (f.size() != 4) throw ParseError(source, line, "incident needs <minute>,<node>,<type>,<severity>");
    const auto minute = parse_number<Minute>(f[0], source, line, "minute");
    if (minute < 0) throw ParseError(source, line, "negative minute");
    if (!log.records.empty() && minute < log.records.back().minute) {
      throw ParseError(source, line, "incidents are not sorted by minute");
    }
    if (f[2].empty()) throw ParseError(source, line, "empty incident type");
    const NodeId node = node_at(topo, f[1], source, line);
    const int severity = parse_number<int>(f[3], source, line, "severity");
    log.append(minute, node, f[2], severity);
  }
  return log;
}

void write_incidents(std::ostream& out, const IncidentLog& log, const Topology& topo) {
  for (const auto& r : log.records) {
    out << r.minute << ',' << topo.name(r.node) << ',' << log.type_name(r) << ',' << r.severity << '\n';
  }
}

IncidentLog load_incidents(const std::filesystem::path& path, const Topology& topo) {
  auto in = open_in(path);
  return read_incidents(in, topo, path.string());
}

void save_incidents(const std::filesystem::path& path, const IncidentLog& log, const Topology& topo) {
  auto out = open_out(path);
  write_incidents(out, log, topo);
  check_written(out, path);
}

// -------------------------------------------------------------------- KPIs

KpiStore read_kpis(std::istream& in, const Topology& topo, const std::string& source) {
  KpiStore store;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = chomp(raw);
    if (text.empty()) continue;
    const auto f = split(text, ',');
    if (f.size() != 4) throw ParseError(source, line, "KPI line needs <node>,<kpi>,<start>,<values>");
    KpiSeries s;
    s.node = node_at(topo, f[0], source, line);
    s.kpi = std::string(f[1]);
    if (s.kpi.empty()) throw ParseError(source, line, "empty KPI name");
    s.start_minute = parse_number<Minute>(f[2], source, line, "start minute");
    for (auto v : split(f[3], ';')) {
      const double x = parse_number<double>(v, source, line, "KPI value");
      if (!std::isfinite(x)) throw ParseError(source, line, "non-finite KPI value");
      s.values.push_back(x);
    }
    try {
      store.add(std::move(s));
    } catch (const ValidationError& e) {
      throw ParseError(source, line, e.what());
    }
  }
  return store;
}

void write_kpis(std::ostream& out, const KpiStore& kpis, const Topology& topo) {
  for (const auto& s : kpis.all()) {
    out << topo.name(s.node) << ',' << s.kpi << ',' << s.start_minute << ',';
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (i) out << ';';
      out << format_real(s.values[i]);
    }
    out << '\n';
  }
}

KpiStore load_kpis(const std::filesystem::path& path, const Topology& topo) {
  auto in = open_in(path);
  return read_kpis(in, topo, path.string());
}

void save_kpis(const std::filesystem::path& path, const KpiStore& kpis, const Topology& topo) {
  auto out = open_out(path);
  write_kpis(out, kpis, topo);
  check_written(out, path);
}

// --------------------------------------------------------------- embedding

IncidentEmbedding read_embedding(std::istream& in, const std::string& source) {
  std::string raw;
  std::size_t line = 0;
  if (!std::getline(in, raw)) throw ParseError(source, 1, "missing header");
  ++line;
  const auto header = split_ws(chomp(raw));
  if (header.size() != 2) throw ParseError(source, line, "header needs <vocab_size> <dim>");
  const auto vocab = parse_number<std::size_t>(header[0], source, line, "vocabulary size");
  const auto dim = parse_number<std::size_t>(header[1], source, line, "dimension");
  if (dim == 0) throw ParseError(source, line, "dimension must be positive");
  IncidentEmbedding emb(dim);
  std::vector<float> vec(dim);
  while (std::getline(in, raw)) {
    ++line;
    const auto text = chomp(raw);
    if (text.empty()) continue;
    const auto f = split_ws(text);
    if (f.size() != dim + 1) throw ParseError(source, line, "expected type and " + std::to_string(dim) + " values");
    for (std::size_t k = 0; k < dim; ++k) vec[k] = parse_number<float>(f[k + 1], source, line, "vector entry");
    try {
      emb.add(std::string(f[0]), vec);
    } catch (const ValidationError& e) {
      throw ParseError(source, line, e.what());
    }
  }
  if (emb.size() != vocab) {
    throw ParseError(source, line, "header announces " + std::to_string(vocab) + " types, found " +
                                       std::to_string(emb.size()));
  }
  return emb;
}

void write_embedding(std::ostream& out, const IncidentEmbedding& emb) {
  out << emb.size() << ' ' << emb.dim() << '\n';
  for (std::size_t r = 0; r < emb.size(); ++r) {
    out << emb.types()[r];
    for (float x : emb.row(r)) out << ' ' << format_float(x);
    out << '\n';
  }
}

IncidentEmbedding load_embedding(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_embedding(in, path.string());
}

void save_embedding(const std::filesystem::path& path, const IncidentEmbedding& emb) {
  auto out = open_out(path);
  write_embedding(out, emb);
  check_written(out, path);
}

// ----------------------------------------------------------------- windows

std::vector<FailureWindow> read_windows(std::istream& in, const std::string& source) {
  std::vector<FailureWindow> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = chomp(raw);
    if (text.empty()) continue;
    const auto f = split(text, ',');
    if (f.size() != 2) throw ParseError(source, line, "window needs start,end");
    FailureWindow w{parse_number<Minute>(f[0], source, line, "start"), parse_number<Minute>(f[1], source, line, "end")};
    if (w.end < w.start) throw ParseError(source, line, "window end precedes start");
    out.push_back(w);
  }
  return out;
}

void write_windows(std::ostream& out, const std::vector<FailureWindow>& windows) {
  for (const auto& w : windows) out << w.start << ',' << w.end << '\n';
}

std::vector<FailureWindow> load_windows(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_windows(in, path.string());
}

void save_windows(const std::filesystem::path& path, const std::vector<FailureWindow>& windows) {
  auto out = open_out(path);
  write_windows(out, windows);
  check_written(out, path);
}

// ----------------------------------------------------------- impact graphs

FailureImpactGraph read_impact_graph(std::istream& in, const Topology& topo, Interner& types,
                                     const std::string& source) {
  FailureImpactGraph g;
  bool have_window = false;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = chomp(raw);
    if (text.empty()) continue;
    const auto f = split(text, ',');
    if (f[0] == "W") {
      if (f.size() != 3) throw ParseError(source, line, "window line needs W,<start>,<end>");
      g.window = {parse_number<Minute>(f[1], source, line, "start"), parse_number<Minute>(f[2], source, line, "end")};
      have_window = true;
    } else if (f[0] == "N") {
      if (f.size() != 2 && !(f.size() == 3 && f[2] == "boundary")) {
        throw ParseError(source, line, "node line needs N,<node>[,boundary]");
      }
      const NodeId v = node_at(topo, f[1], source, line);
      g.nodes.push_back(v);
      if (f.size() == 3) g.boundary_nodes.push_back(v);
    } else if (f[0] == "I") {
      if (f.size() != 6) throw ParseError(source, line, "incident line needs I,<index>,<minute>,<node>,<type>,<severity>");
      g.incident_indices.push_back(parse_number<std::size_t>(f[1], source, line, "incident index"));
      IncidentRecord r;
      r.minute = parse_number<Minute>(f[2], source, line, "minute");
      r.node = node_at(topo, f[3], source, line);
      if (f[4].empty()) throw ParseError(source, line, "empty incident type");
      r.itype = types.intern(f[4]);
      r.severity = parse_number<int>(f[5], source, line, "severity");
      g.incidents.push_back(r);
    } else {
      throw ParseError(source, line, "unknown record kind '" + std::string(f[0]) + "'");
    }
  }
  if (!have_window) throw ParseError(source, line, "missing window line");
  std::sort(g.nodes.begin(), g.nodes.end());
  std::sort(g.boundary_nodes.begin(), g.boundary_nodes.end());
  for (const auto& r : g.incidents) {
    if (!g.window.contains(r.minute)) throw ValidationError(source + ": incident outside the window");
    if (!std::binary_search(g.nodes.begin(), g.nodes.end(), r.node)) {
      throw ValidationError(source + ": incident on a node outside the graph");
    }
  }
  return g;
}

void write_impact_graph(std::ostream& out, const FailureImpactGraph& g, const Topology& topo,
                        const Interner& types) {
  out << "W," << g.window.start << ',' << g.window.end << '\n';
  for (NodeId v : g.nodes) {
    out << "N," << topo.name(v);
    if (std::binary_search(g.boundary_nodes.begin(), g.boundary_nodes.end(), v)) out << ",boundary";
    out << '\n';
  }
  for (std::size_t k = 0; k < g.incidents.size(); ++k) {
    const auto& r = g.incidents[k];
    out << "I," << g.incident_indices[k] << ',' << r.minute << ',' << topo.name(r.node) << ','
        << types.name(r.itype) << ',' << r.severity << '\n';
  }
}

void save_impact_graphs(const std::filesystem::path& dir, const std::vector<FailureImpactGraph>& graphs,
                        const Topology& topo, const Interner& types) {
  std::filesystem::create_directories(dir);
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("impact_", 0) == 0 && entry.path().extension() == ".txt") std::filesystem::remove(entry.path());
  }
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "impact_%05zu.txt", i);
    const auto path = dir / name;
    auto out = open_out(path);
    write_impact_graph(out, graphs[i], topo, types);
    check_written(out, path);
  }
}

ImpactGraphSet load_impact_graphs(const std::filesystem::path& dir, const Topology& topo) {
  if (!std::filesystem::is_directory(dir)) throw Error("'" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("impact_", 0) == 0 && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  ImpactGraphSet set;
  for (const auto& path : files) {
    auto in = open_in(path);
    set.graphs.push_back(read_impact_graph(in, topo, set.types, path.string()));
  }
  return set;
}

// ------------------------------------------------------------ ground truth

std::vector<int> read_ground_truth(std::istream& in, const std::string& source) {
  std::vector<std::pair<std::size_t, int>> rows;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = chomp(raw);
    if (text.empty()) continue;
    const auto f = split(text, ',');
    if (f.size() != 2) throw ParseError(source, line, "ground truth needs <incident_index>,<failure_id|NOISE>");
    const auto index = parse_number<std::size_t>(f[0], source, line, "incident index");
    const int label = f[1] == "NOISE" ? -1 : parse_number<int>(f[1], source, line, "failure id");
    if (label < -1) throw ParseError(source, line, "failure ids must be non-negative");
    rows.emplace_back(index, label);
  }
  std::vector<int> labels(rows.size(), -2);
  for (auto [index, label] : rows) {
    if (index >= labels.size() || labels[index] != -2) {
      throw ValidationError(source + ": incident indices must cover 0..n-1 exactly once");
    }
    labels[index] = label;
  }
  return labels;
}

void write_ground_truth(std::ostream& out, const std::vector<int>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << i << ',';
    if (labels[i] < 0) {
      out << "NOISE";
    } else {
      out << labels[i];
    }
    out << '\n';
  }
}

std::vector<int> load_ground_truth(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_ground_truth(in, path.string());
}

void save_ground_truth(const std::filesystem::path& path, const std::vector<int>& labels) {
  auto out = open_out(path);
  write_ground_truth(out, labels);
  check_written(out, path);
}

}  // namespace incagg::io
