#include "incagg/louvain.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_map>

#include "incagg/error.hpp"

namespace incagg::impact {

void WeightedGraph::add_edge(std::uint32_t a, std::uint32_t b, double w) {
  if (a >= size() || b >= size()) throw ValidationError("edge endpoint out of range");
  if (a == b) {
    loops_[a] += w;
    return;
  }
  auto bump = [w](std::vector<std::pair<std::uint32_t, double>>& list, std::uint32_t to) {
    for (auto& [v, weight] : list) {
      if (v == to) {
        weight += w;
        return;
      }
    }
    list.emplace_back(to, w);
  };
  bump(adj_[a], b);
  bump(adj_[b], a);
}

double WeightedGraph::weight(std::uint32_t a, std::uint32_t b) const {
  if (a == b) return loops_[a];
  for (const auto& [v, w] : adj_[a]) {
    if (v == b) return w;
  }
  return 0.0;
}

double WeightedGraph::degree(std::uint32_t v) const {
  double k = 2.0 * loops_[v];
  for (const auto& [u, w] : adj_[v]) k += w;
  return k;
}

double WeightedGraph::total_degree() const {
  double total = 0.0;
  for (std::uint32_t v = 0; v < size(); ++v) total += degree(v);
  return total;
}

double modularity(const WeightedGraph& g, std::span<const std::uint32_t> communities) {
  if (communities.size() != g.size()) throw ValidationError("partition does not cover the graph");
  const double two_m = g.total_degree();
  if (two_m <= 0.0) return 0.0;
  std::unordered_map<std::uint32_t, double> inside, total;
  for (std::uint32_t v = 0; v < g.size(); ++v) {
    const auto c = communities[v];
    total[c] += g.degree(v);
    inside[c] += 2.0 * g.loop(v);
    for (const auto& [u, w] : g.neighbors(v)) {
      if (communities[u] == c) inside[c] += w;
    }
  }
  double q = 0.0;
  for (const auto& [c, tot] : total) q += inside[c] / two_m - (tot / two_m) * (tot / two_m);
  return q;
}

Partition canonicalize(std::span<const std::uint32_t> communities) {
  std::unordered_map<std::uint32_t, std::uint32_t> relabel;
  Partition out(communities.size());
  for (std::size_t v = 0; v < communities.size(); ++v) {
    auto [it, fresh] = relabel.emplace(communities[v], static_cast<std::uint32_t>(relabel.size()));
    out[v] = it->second;
  }
  return out;
}

namespace {

// One level of local moving. Returns true if any vertex changed community.
bool local_moving(const WeightedGraph& g, double two_m, Partition& comm, std::mt19937_64& rng) {
  const std::size_t n = g.size();
  std::vector<double> k(n), tot(n, 0.0);
  for (std::uint32_t v = 0; v < n; ++v) {
    k[v] = g.degree(v);
    tot[comm[v]] += k[v];
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::shuffle(order.begin(), order.end(), rng);

  // Community ids are vertex ids of this level, so unused ids are empty
  // communities.
  std::vector<std::uint32_t> members(n, 0);
  for (auto c : comm) ++members[c];
  std::vector<std::uint32_t> empty;
  for (std::uint32_t c = 0; c < n; ++c) {
    if (members[c] == 0) empty.push_back(c);
  }

  std::vector<double> links(n, 0.0);
  std::vector<char> seen(n, 0);
  std::vector<std::uint32_t> touched;
  bool any_move = false;
  for (int pass = 0; pass < 1000; ++pass) {
    bool moved = false;
    for (std::uint32_t v : order) {
      if (k[v] <= 0.0) continue;
      const std::uint32_t own = comm[v];
      for (auto c : touched) {
        links[c] = 0.0;
        seen[c] = 0;
      }
      touched.assign(1, own);
      seen[own] = 1;
      for (const auto& [u, w] : g.neighbors(v)) {
        const auto c = comm[u];
        if (!seen[c]) {
          seen[c] = 1;
          touched.push_back(c);
        }
        links[c] += w;
      }
      tot[own] -= k[v];
      --members[own];

      // gain(c) = links(v, c) - tot(c) k_v / 2m, relative to v sitting alone.
      const double tol = 1e-12 * k[v];
      std::uint32_t best = own;
      double best_gain = links[own] - tot[own] * k[v] / two_m;
      for (auto c : touched) {
        if (c == own) continue;
        const double gain = links[c] - tot[c] * k[v] / two_m;
        if (gain > best_gain + tol) {
          best = c;
          best_gain = gain;
        }
      }
      if (best_gain < -tol && members[own] > 0 && !empty.empty()) {
        best = empty.back();
        empty.pop_back();
      }

      tot[best] += k[v];
      ++members[best];
      if (best != own) {
        if (members[own] == 0) empty.push_back(own);
        comm[v] = best;
        moved = true;
        any_move = true;
      }
    }
    if (!moved) break;
  }
  return any_move;
}

WeightedGraph contract(const WeightedGraph& g, const Partition& comm, std::uint32_t count) {
  WeightedGraph out(count);
  for (std::uint32_t v = 0; v < g.size(); ++v) {
    const auto cv = comm[v];
    if (g.loop(v) != 0.0) out.add_edge(cv, cv, g.loop(v));
    for (const auto& [u, w] : g.neighbors(v)) {
      if (u < v) continue;
      const auto cu = comm[u];
      // A within-community edge becomes a loop; each undirected edge is seen once.
      out.add_edge(cv, cu, w);
    }
  }
  return out;
}

}  // namespace

Partition louvain(const WeightedGraph& g, std::uint64_t seed) {
  Partition result(g.size());
  std::iota(result.begin(), result.end(), 0u);
  if (g.size() == 0) return result;
  const double two_m = g.total_degree();
  if (two_m <= 0.0) return result;

  std::mt19937_64 rng(seed);
  WeightedGraph level = g;
  while (true) {
    Partition comm(level.size());
    std::iota(comm.begin(), comm.end(), 0u);
    if (!local_moving(level, two_m, comm, rng)) break;
    comm = canonicalize(comm);
    const auto count = *std::max_element(comm.begin(), comm.end()) + 1;
    for (auto& c : result) c = comm[c];
    if (count == level.size()) break;
    level = contract(level, comm, count);
  }
  return canonicalize(result);
}

}  // namespace incagg::impact
