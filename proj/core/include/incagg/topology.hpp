#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "incagg/interner.hpp"

namespace incagg {

using NodeId = std::uint32_t;

enum class Layer : std::uint8_t { kUnspecified, kApplication, kPlatform, kInfrastructure };

std::string_view to_string(Layer layer);
/// Accepts "application", "platform", "infrastructure" and "" / "-".
Layer parse_layer(std::string_view text);

/// Undirected component graph. Node names are interned to dense ids in
/// insertion order; adjacency lists are kept sorted.
class Topology {
 public:
  NodeId add_node(std::string_view name, Layer layer = Layer::kUnspecified);
  /// Adds an undirected edge. Self-loops throw ValidationError; duplicates
  /// are ignored. Returns true when the edge is new.
  bool add_edge(NodeId a, NodeId b);

  std::size_t node_count() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  std::span<const NodeId> neighbors(NodeId node) const;
  bool adjacent(NodeId a, NodeId b) const;
  bool contains(NodeId node) const noexcept { return node < adjacency_.size(); }

  const std::string& name(NodeId node) const { return names_.name(node); }
  std::optional<NodeId> find(std::string_view name) const { return names_.find(name); }
  /// Throws LookupError for unknown names.
  NodeId id(std::string_view name) const { return names_.at(name); }
  Layer layer(NodeId node) const { return layers_.at(node); }

  /// Every edge once, as (low, high) id pairs in lexicographic order.
  std::vector<std::pair<NodeId, NodeId>> edges() const;

  bool operator==(const Topology& other) const;

 private:
  Interner names_;
  std::vector<Layer> layers_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t edge_count_ = 0;
};

inline constexpr std::uint32_t kUnreachable = UINT32_MAX;

/// Breadth-first hop counts from `source`; unreachable nodes get kUnreachable.
std::vector<std::uint32_t> bfs_distances(const Topology& topo, NodeId source);

/// Shortest path length in hops, or nullopt when disconnected.
/// Throws LookupError for ids outside the graph.
std::optional<std::uint32_t> shortest_hop_distance(const Topology& topo, NodeId a, NodeId b);

/// Lazily memoised single-source BFS rows. Not thread-safe.
class HopDistanceCache {
 public:
  explicit HopDistanceCache(const Topology& topo) : topo_(&topo), rows_(topo.node_count()) {}

  std::optional<std::uint32_t> distance(NodeId a, NodeId b);

 private:
  const Topology* topo_;
  std::vector<std::vector<std::uint32_t>> rows_;
};

}  // namespace incagg
