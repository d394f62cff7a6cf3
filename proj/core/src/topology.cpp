#include "incagg/topology.hpp"

#include <algorithm>
#include <deque>

#include "incagg/error.hpp"

namespace incagg {

std::string_view to_string(Layer layer) {
  switch (layer) {
    case Layer::kApplication:
      return "application";
    case Layer::kPlatform:
      return "platform";
    case Layer::kInfrastructure:
      return "infrastructure";
    case Layer::kUnspecified:
      break;
  }
  return "-";
}

Layer parse_layer(std::string_view text) {
  if (text == "application") return Layer::kApplication;
  if (text == "platform") return Layer::kPlatform;
  if (text == "infrastructure") return Layer::kInfrastructure;
  if (text.empty() || text == "-") return Layer::kUnspecified;
  throw ValidationError("unknown layer '" + std::string(text) + "'");
}

NodeId Topology::add_node(std::string_view name, Layer layer) {
  if (name.empty()) throw ValidationError("empty node id");
  if (names_.find(name)) throw ValidationError("duplicate node '" + std::string(name) + "'");
  const NodeId id = names_.intern(name);
  layers_.push_back(layer);
  adjacency_.emplace_back();
  return id;
}

bool Topology::add_edge(NodeId a, NodeId b) {
  if (!contains(a) || !contains(b)) throw ValidationError("edge references a missing node");
  if (a == b) throw ValidationError("self-loop on node '" + name(a) + "'");
  auto& na = adjacency_[a];
  auto pos = std::lower_bound(na.begin(), na.end(), b);
  if (pos != na.end() && *pos == b) return false;
  na.insert(pos, b);
  auto& nb = adjacency_[b];
  nb.insert(std::lower_bound(nb.begin(), nb.end(), a), a);
  ++edge_count_;
  return true;
}

std::span<const NodeId> Topology::neighbors(NodeId node) const {
  if (!contains(node)) throw LookupError("node id " + std::to_string(node) + " out of range");
  return adjacency_[node];
}

bool Topology::adjacent(NodeId a, NodeId b) const {
  auto n = neighbors(a);
  return std::binary_search(n.begin(), n.end(), b);
}

std::vector<std::pair<NodeId, NodeId>> Topology::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(edge_count_);
  for (NodeId a = 0; a < adjacency_.size(); ++a) {
    for (NodeId b : adjacency_[a]) {
      if (a < b) out.emplace_back(a, b);
    }
  }
  return out;
}

bool Topology::operator==(const Topology& other) const {
  return names_ == other.names_ && layers_ == other.layers_ && adjacency_ == other.adjacency_;
}

std::vector<std::uint32_t> bfs_distances(const Topology& topo, NodeId source) {
  if (!topo.contains(source)) throw LookupError("node id " + std::to_string(source) + " out of range");
  std::vector<std::uint32_t> dist(topo.node_count(), kUnreachable);
  std::deque<NodeId> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    for (NodeId u : topo.neighbors(v)) {
      if (dist[u] == kUnreachable) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist;
}

std::optional<std::uint32_t> shortest_hop_distance(const Topology& topo, NodeId a, NodeId b) {
  if (!topo.contains(a) || !topo.contains(b)) throw LookupError("unknown node in distance query");
  if (a == b) return 0u;
  const auto d = bfs_distances(topo, a)[b];
  if (d == kUnreachable) return std::nullopt;
  return d;
}

std::optional<std::uint32_t> HopDistanceCache::distance(NodeId a, NodeId b) {
  if (!topo_->contains(a) || !topo_->contains(b)) throw LookupError("unknown node in distance query");
  if (a == b) return 0u;
  // Rows are symmetric; reuse whichever endpoint is already cached.
  if (rows_[a].empty() && !rows_[b].empty()) std::swap(a, b);
  if (rows_[a].empty()) rows_[a] = bfs_distances(*topo_, a);
  const auto d = rows_[a][b];
  if (d == kUnreachable) return std::nullopt;
  return d;
}

}  // namespace incagg
