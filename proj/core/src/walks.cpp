#include "incagg/walks.hpp"

#include <algorithm>
#include <random>

#include <spdlog/spdlog.h>

#include "incagg/error.hpp"

namespace incagg::embed {

void validate(const WalkConfig& cfg) {
  if (cfg.walk_length <= 0 || cfg.walks_per_start <= 0 || cfg.window <= 0 || cfg.dim <= 0 || cfg.epochs <= 0 ||
      cfg.negatives <= 0 || cfg.workers <= 0) {
    throw ValidationError("walk/training parameters must be positive");
  }
  if (!(cfg.learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (cfg.window > cfg.walk_length) throw ValidationError("window must not exceed walk_length");
}

WalkConfig walk_config_from(const KeyValueConfig& kv, WalkConfig base) {
  base.walk_length = static_cast<int>(kv.get_int("walk_length", base.walk_length));
  base.walks_per_start = static_cast<int>(kv.get_int("walks_per_start", base.walks_per_start));
  base.window = static_cast<int>(kv.get_int("window", base.window));
  base.dim = static_cast<int>(kv.get_int("dim", base.dim));
  base.epochs = static_cast<int>(kv.get_int("epochs", base.epochs));
  base.negatives = static_cast<int>(kv.get_int("negatives", base.negatives));
  base.learning_rate = kv.get_double("learning_rate", base.learning_rate);
  base.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(base.seed)));
  base.workers = static_cast<int>(kv.get_int("workers", base.workers));
  validate(base);
  return base;
}

std::size_t WalkCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.size();
  return n;
}

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

WalkCorpus generate_walks(const std::vector<FailureImpactGraph>& graphs, const Interner& types,
                          const Topology& topo, const WalkConfig& cfg) {
  validate(cfg);
  WalkCorpus corpus;
  corpus.type_names = types.names();
  const auto length = static_cast<std::size_t>(cfg.walk_length);

  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const auto& g = graphs[gi];
    if (g.incidents.empty()) {
      spdlog::warn("impact graph {} [{}, {}] has no incidents; skipped", gi, g.window.start, g.window.end);
      continue;
    }
    const std::size_t n = g.nodes.size();
    auto local = [&](NodeId v) -> std::size_t {
      auto it = std::lower_bound(g.nodes.begin(), g.nodes.end(), v);
      if (it == g.nodes.end() || *it != v) throw ValidationError("impact graph incident on a non-member node");
      return static_cast<std::size_t>(it - g.nodes.begin());
    };
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t a = 0; a < n; ++a) {
      for (NodeId nb : topo.neighbors(g.nodes[a])) {
        auto it = std::lower_bound(g.nodes.begin(), g.nodes.end(), nb);
        if (it != g.nodes.end() && *it == nb) adj[a].push_back(static_cast<std::size_t>(it - g.nodes.begin()));
      }
    }
    std::vector<std::vector<TypeId>> emits(n);
    for (const auto& r : g.incidents) {
      if (r.itype >= types.size()) throw ValidationError("impact graph incident has an unknown type");
      emits[local(r.node)].push_back(r.itype);
    }

    // Components that hold no incident cannot finish a walk.
    std::vector<int> component(n, -1);
    std::vector<char> productive;
    for (std::size_t s = 0; s < n; ++s) {
      if (component[s] >= 0) continue;
      const int id = static_cast<int>(productive.size());
      bool has = false;
      std::vector<std::size_t> stack{s};
      component[s] = id;
      while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        has = has || !emits[v].empty();
        for (auto u : adj[v]) {
          if (component[u] < 0) {
            component[u] = id;
            stack.push_back(u);
          }
        }
      }
      productive.push_back(has ? 1 : 0);
    }

    std::mt19937_64 rng(mix(cfg.seed, gi));
    for (std::size_t start = 0; start < n; ++start) {
      if (!productive[static_cast<std::size_t>(component[start])]) continue;
      for (int w = 0; w < cfg.walks_per_start; ++w) {
        std::vector<TypeId> seq;
        seq.reserve(length);
        std::size_t cur = start;
        auto emit = [&] {
          const auto& pool = emits[cur];
          if (pool.empty()) return;
          std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
          seq.push_back(pool[pick(rng)]);
        };
        emit();
        while (seq.size() < length) {
          if (!adj[cur].empty()) {
            std::uniform_int_distribution<std::size_t> step(0, adj[cur].size() - 1);
            cur = adj[cur][step(rng)];
          }
          emit();
        }
        corpus.sequences.push_back(std::move(seq));
      }
    }
  }
  return corpus;
}

}  // namespace incagg::embed
