#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace incagg::impact {

/// Undirected weighted graph on dense vertices 0..n-1. Self-loop weight
/// `loops[v]` counts twice towards the degree, as in the contracted graphs
/// Louvain builds between levels.
class WeightedGraph {
 public:
  explicit WeightedGraph(std::size_t n = 0) : adj_(n), loops_(n, 0.0) {}

  std::size_t size() const noexcept { return adj_.size(); }
  /// Accumulates onto an existing edge. a == b adds a self-loop.
  void add_edge(std::uint32_t a, std::uint32_t b, double w);

  std::span<const std::pair<std::uint32_t, double>> neighbors(std::uint32_t v) const { return adj_[v]; }
  double loop(std::uint32_t v) const { return loops_[v]; }
  double weight(std::uint32_t a, std::uint32_t b) const;
  /// k_v = sum_u W_vu + 2 * loop(v).
  double degree(std::uint32_t v) const;
  /// 2m = sum_v k_v.
  double total_degree() const;

 private:
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj_;
  std::vector<double> loops_;
};

/// Community id per vertex.
using Partition = std::vector<std::uint32_t>;

/// Weighted Newman modularity; 0 when the graph has no weight.
double modularity(const WeightedGraph& g, std::span<const std::uint32_t> communities);

/// Renumbers community ids to 0..k-1 in order of first appearance.
Partition canonicalize(std::span<const std::uint32_t> communities);

/// Multi-level Louvain: greedy local moving (seeded visit order; equal gains
/// keep the current community) followed by contraction, repeated until a
/// level makes no move.
Partition louvain(const WeightedGraph& g, std::uint64_t seed);

}  // namespace incagg::impact
