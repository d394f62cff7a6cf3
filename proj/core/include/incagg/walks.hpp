#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "incagg/config.hpp"
#include "incagg/records.hpp"
#include "incagg/topology.hpp"

namespace incagg::embed {

struct WalkConfig {
  int walk_length = 40;
  int walks_per_start = 10;
  int window = 10;
  int dim = 128;
  int epochs = 5;
  int negatives = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 1;
  /// 1 is the deterministic mode; more workers update shared weights
  /// without locks and are not reproducible.
  int workers = 1;
};

/// Throws ValidationError if a field is non-positive or window > walk_length.
void validate(const WalkConfig& cfg);
/// Reads WalkConfig keys (walk_length, walks_per_start, window, dim, epochs,
/// negatives, learning_rate, seed, workers) over `base`.
WalkConfig walk_config_from(const KeyValueConfig& kv, WalkConfig base = {});

struct WalkCorpus {
  std::vector<std::string> type_names;  // indexed by TypeId
  std::vector<std::vector<TypeId>> sequences;

  std::size_t token_count() const;
};

/// Two-level walks over each impact graph: step to a uniformly random
/// topology neighbour inside the graph (stay put when isolated), then emit a
/// type drawn from that node's incident multiset. The first emission happens
/// at the start node. Nodes without incidents are traversed silently.
/// Starts that cannot reach any incident are skipped; graphs with no
/// incidents are skipped with a warning.
WalkCorpus generate_walks(const std::vector<FailureImpactGraph>& graphs, const Interner& types,
                          const Topology& topo, const WalkConfig& cfg);

}  // namespace incagg::embed
