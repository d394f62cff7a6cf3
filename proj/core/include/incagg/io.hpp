#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "incagg/embedding.hpp"
#include "incagg/records.hpp"
#include "incagg/topology.hpp"

namespace incagg::io {

// Line-oriented text codecs. Readers take a `source` label used in
// ParseError messages. Every writer/reader pair round-trips exactly:
// reals are written in shortest round-trip form.

/// `N,<node>,<layer>` and `E,<src>,<dst>` lines.
Topology read_topology(std::istream& in, const std::string& source = "<topology>");
void write_topology(std::ostream& out, const Topology& topo);
Topology load_topology(const std::filesystem::path& path);
void save_topology(const std::filesystem::path& path, const Topology& topo);

/// `<minute>,<node>,<incident_type>,<severity>` lines sorted by minute.
IncidentLog read_incidents(std::istream& in, const Topology& topo,
                           const std::string& source = "<incidents>");
void write_incidents(std::ostream& out, const IncidentLog& log, const Topology& topo);
IncidentLog load_incidents(const std::filesystem::path& path, const Topology& topo);
void save_incidents(const std::filesystem::path& path, const IncidentLog& log, const Topology& topo);

/// `<node>,<kpi>,<start_minute>,<v0>;<v1>;...` lines.
KpiStore read_kpis(std::istream& in, const Topology& topo, const std::string& source = "<kpis>");
void write_kpis(std::ostream& out, const KpiStore& kpis, const Topology& topo);
KpiStore load_kpis(const std::filesystem::path& path, const Topology& topo);
void save_kpis(const std::filesystem::path& path, const KpiStore& kpis, const Topology& topo);

/// Header `<vocab_size> <dim>`, then `<type> <f_1> ... <f_dim>` at 9
/// significant digits.
IncidentEmbedding read_embedding(std::istream& in, const std::string& source = "<embedding>");
void write_embedding(std::ostream& out, const IncidentEmbedding& emb);
IncidentEmbedding load_embedding(const std::filesystem::path& path);
void save_embedding(const std::filesystem::path& path, const IncidentEmbedding& emb);

/// `start,end` lines.
std::vector<FailureWindow> read_windows(std::istream& in, const std::string& source = "<windows>");
void write_windows(std::ostream& out, const std::vector<FailureWindow>& windows);
std::vector<FailureWindow> load_windows(const std::filesystem::path& path);
void save_windows(const std::filesystem::path& path, const std::vector<FailureWindow>& windows);

/// One impact graph per file:
///   W,<start>,<end>
///   N,<node>[,boundary]
///   I,<incident_index>,<minute>,<node>,<incident_type>,<severity>
/// Incident types are interned into `types`.
FailureImpactGraph read_impact_graph(std::istream& in, const Topology& topo, Interner& types,
                                     const std::string& source = "<impact>");
void write_impact_graph(std::ostream& out, const FailureImpactGraph& graph, const Topology& topo,
                        const Interner& types);

struct ImpactGraphSet {
  Interner types;
  std::vector<FailureImpactGraph> graphs;
};

/// Writes `impact_<nnnnn>.txt` files into `dir` (created if missing).
void save_impact_graphs(const std::filesystem::path& dir, const std::vector<FailureImpactGraph>& graphs,
                        const Topology& topo, const Interner& types);
/// Reads every `impact_*.txt` file in `dir` in name order.
ImpactGraphSet load_impact_graphs(const std::filesystem::path& dir, const Topology& topo);

/// Ground truth: `<incident_index>,<failure_id|NOISE>`; NOISE is stored as -1.
std::vector<int> read_ground_truth(std::istream& in, const std::string& source = "<ground_truth>");
void write_ground_truth(std::ostream& out, const std::vector<int>& labels);
std::vector<int> load_ground_truth(const std::filesystem::path& path);
void save_ground_truth(const std::filesystem::path& path, const std::vector<int>& labels);

/// Shortest decimal form that parses back to the same double.
std::string format_real(double value);
/// 9 significant digits, enough to round-trip a float.
std::string format_float(float value);

/// Reads a whole file into a string; throws Error if it cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace incagg::io
