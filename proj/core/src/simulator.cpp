#include "incagg/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "incagg/error.hpp"
#include "incagg/io.hpp"

namespace incagg::sim {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (salt + 0x632be59bd9b4e019ULL));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kTopologySalt = 0;
constexpr std::uint64_t kNoiseSalt = 1;
constexpr std::uint64_t kKpiSalt = 2;
constexpr std::uint64_t kSilenceSalt = 3;
constexpr std::uint64_t kFailureSalt = 100;

int total_nodes(const ScenarioConfig& cfg) { return cfg.app_nodes + cfg.platform_nodes + cfg.infra_nodes; }

int failure_span(const ScenarioConfig& cfg, FailureProfile p) {
  return p == FailureProfile::kRamp ? cfg.ramp_minutes + cfg.failure_minutes : cfg.failure_minutes;
}

int failure_slots(const ScenarioConfig& cfg) {
  return cfg.failure_overlap ? (cfg.n_failures + 1) / 2 : cfg.n_failures;
}

int slot_spacing(const ScenarioConfig& cfg) {
  const int slots = failure_slots(cfg);
  return slots == 0 ? 0 : (cfg.duration_minutes - cfg.first_failure_minute) / slots;
}

std::string class_type(int cls, const std::string& slot, int k) {
  return "f" + std::to_string(cls) + "_" + slot + "_" + std::to_string(k);
}

std::string noise_type(int k) { return "noise_" + std::to_string(k); }

int poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<int> d(mean);
  return d(rng);
}

Topology build_topology(const ScenarioConfig& cfg) {
  Topology topo;
  std::vector<NodeId> infra;
  std::vector<NodeId> platform;
  std::vector<NodeId> app;
  for (int i = 0; i < cfg.infra_nodes; ++i) infra.push_back(topo.add_node("infra" + std::to_string(i), Layer::kInfrastructure));
  for (int i = 0; i < cfg.platform_nodes; ++i) platform.push_back(topo.add_node("plat" + std::to_string(i), Layer::kPlatform));
  for (int i = 0; i < cfg.app_nodes; ++i) app.push_back(topo.add_node("app" + std::to_string(i), Layer::kApplication));

  std::mt19937_64 rng(derive_seed(cfg.seed, kTopologySalt));
  auto pick = [&rng](const std::vector<NodeId>& pool) {
    std::uniform_int_distribution<std::size_t> d(0, pool.size() - 1);
    return pool[d(rng)];
  };
  for (NodeId p : platform) topo.add_edge(p, pick(infra));
  for (NodeId a : app) topo.add_edge(a, pick(platform));
  for (const auto* layer : {&infra, &platform, &app}) {
    if (layer->size() < 2) continue;
    for (NodeId v : *layer) {
      for (int e = 0; e < cfg.dependency_degree; ++e) {
        NodeId u = pick(*layer);
        if (u != v) topo.add_edge(v, u);
      }
    }
  }
  return topo;
}

struct Cascade {
  std::vector<NodeId> affected;
  std::vector<int> hops;
};

Cascade spread(const Topology& topo, NodeId root, const ScenarioConfig& cfg, const std::set<NodeId>& blocked,
               std::mt19937_64& rng) {
  Cascade c;
  std::vector<char> seen(topo.node_count(), 0);
  std::deque<std::pair<NodeId, int>> queue{{root, 0}};
  seen[root] = 1;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (!queue.empty()) {
    const auto [v, h] = queue.front();
    queue.pop_front();
    c.affected.push_back(v);
    c.hops.push_back(h);
    if (h >= cfg.max_hops) continue;
    for (NodeId nb : topo.neighbors(v)) {
      if (seen[nb]) continue;
      seen[nb] = 1;
      if (blocked.count(nb)) continue;
      if (u(rng) < std::pow(cfg.attenuation, h + 1)) queue.emplace_back(nb, h + 1);
    }
  }
  return c;
}

struct Emitted {
  IncidentRecord record;  // itype unused until interning
  std::string type;
  int label;
};

}  // namespace

void validate(const ScenarioConfig& cfg) {
  if (cfg.app_nodes < 0 || cfg.platform_nodes < 0 || cfg.infra_nodes < 0) throw ValidationError("layer sizes must be non-negative");
  if (cfg.app_nodes > 0 && cfg.platform_nodes == 0) throw ValidationError("application nodes need platform nodes");
  if (cfg.platform_nodes > 0 && cfg.infra_nodes == 0) throw ValidationError("platform nodes need infrastructure nodes");
  if (cfg.dependency_degree < 0) throw ValidationError("dependency_degree must be non-negative");
  if (!(cfg.noise_rate >= 0.0)) throw ValidationError("noise_rate must be non-negative");
  if (cfg.noise_rate > 0.0 && cfg.noise_vocab <= 0) throw ValidationError("noise needs a positive noise_vocab");
  if (cfg.n_failures < 0) throw ValidationError("n_failures must be non-negative");
  if (cfg.n_failures > 0 && total_nodes(cfg) == 0) throw ValidationError("failures need at least one node");
  if (cfg.failure_classes <= 0 || cfg.types_per_slot <= 0) throw ValidationError("failure_classes and types_per_slot must be positive");
  if (!(cfg.silent_prob >= 0.0 && cfg.silent_prob <= 1.0)) throw ValidationError("silent_prob must lie in [0, 1]");
  if (!(cfg.attenuation > 0.0 && cfg.attenuation <= 1.0)) throw ValidationError("attenuation must lie in (0, 1]");
  if (cfg.max_hops < 0) throw ValidationError("max_hops must be non-negative");
  if (cfg.min_affected < 1) throw ValidationError("min_affected must be positive");
  if (cfg.n_failures > 0 && cfg.min_affected > total_nodes(cfg)) throw ValidationError("min_affected exceeds the node count");
  if (!(cfg.incidents_per_failure_node >= 1.0)) throw ValidationError("incidents_per_failure_node must be at least 1");
  if (cfg.failure_minutes <= 0 || cfg.ramp_minutes <= 0) throw ValidationError("failure and ramp lengths must be positive");
  if (cfg.duration_minutes <= 0) throw ValidationError("duration_minutes must be positive");
  if (cfg.first_failure_minute < 0 || cfg.first_failure_minute >= cfg.duration_minutes) throw ValidationError("first_failure_minute must fall inside the stream");
  if (cfg.ramp_failures < 0 || cfg.ramp_failures > cfg.n_failures) throw ValidationError("ramp_failures must lie in [0, n_failures]");
  if (!(cfg.ramp_peak > 0.0)) throw ValidationError("ramp_peak must be positive");
  if (cfg.kpi_lag_max < 0 || !(cfg.kpi_jitter >= 0.0)) throw ValidationError("kpi_lag_max and kpi_jitter must be non-negative");
  if (cfg.kpi_names.empty()) throw ValidationError("at least one KPI name is required");
  if (cfg.n_failures > 0) {
    const int longest = failure_span(cfg, cfg.ramp_failures > 0 ? FailureProfile::kRamp : FailureProfile::kBurst);
    if (slot_spacing(cfg) <= longest + cfg.kpi_lag_max) {
      throw ValidationError("failures do not fit: spacing must exceed the failure length plus KPI lag");
    }
  }
}

ScenarioConfig scenario_config_from(const KeyValueConfig& kv, ScenarioConfig base) {
  auto i = [&kv](const char* key, int& field) { field = static_cast<int>(kv.get_int(key, field)); };
  auto d = [&kv](const char* key, double& field) { field = kv.get_double(key, field); };
  base.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(base.seed)));
  i("app_nodes", base.app_nodes);
  i("platform_nodes", base.platform_nodes);
  i("infra_nodes", base.infra_nodes);
  i("dependency_degree", base.dependency_degree);
  d("noise_rate", base.noise_rate);
  i("noise_vocab", base.noise_vocab);
  base.shared_noise = kv.get_bool("shared_noise", base.shared_noise);
  i("n_failures", base.n_failures);
  i("failure_classes", base.failure_classes);
  i("types_per_slot", base.types_per_slot);
  if (auto scope = kv.get("vocabulary")) {
    if (*scope == "tier") {
      base.vocabulary = VocabularyScope::kTier;
    } else if (*scope == "node") {
      base.vocabulary = VocabularyScope::kNode;
    } else {
      throw ValidationError("vocabulary must be tier or node");
    }
  }
  base.failure_overlap = kv.get_bool("failure_overlap", base.failure_overlap);
  d("silent_prob", base.silent_prob);
  base.persistent_silence = kv.get_bool("persistent_silence", base.persistent_silence);
  base.recurring_cascades = kv.get_bool("recurring_cascades", base.recurring_cascades);
  d("attenuation", base.attenuation);
  i("max_hops", base.max_hops);
  i("min_affected", base.min_affected);
  d("incidents_per_failure_node", base.incidents_per_failure_node);
  i("failure_minutes", base.failure_minutes);
  i("first_failure_minute", base.first_failure_minute);
  i("duration_minutes", base.duration_minutes);
  i("ramp_failures", base.ramp_failures);
  i("ramp_minutes", base.ramp_minutes);
  d("ramp_peak", base.ramp_peak);
  i("kpi_lag_max", base.kpi_lag_max);
  d("kpi_baseline", base.kpi_baseline);
  d("kpi_jitter", base.kpi_jitter);
  d("kpi_pulse", base.kpi_pulse);
  if (auto names = kv.get("kpi_names")) {
    base.kpi_names.clear();
    std::stringstream ss(*names);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) base.kpi_names.push_back(part);
    }
  }
  validate(base);
  return base;
}

std::vector<FailureWindow> GroundTruth::windows() const {
  std::vector<FailureWindow> w;
  for (const auto& f : failures) w.push_back(f.window);
  std::sort(w.begin(), w.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  std::vector<FailureWindow> merged;
  for (const auto& x : w) {
    if (!merged.empty() && x.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, x.end);
    } else {
      merged.push_back(x);
    }
  }
  return merged;
}

Scenario generate_scenario(const ScenarioConfig& cfg) {
  validate(cfg);
  Scenario sc;
  sc.topology = build_topology(cfg);
  const Topology& topo = sc.topology;
  const auto n_nodes = static_cast<NodeId>(topo.node_count());
  std::vector<Emitted> emitted;

  const int spacing = slot_spacing(cfg);
  std::vector<char> unmonitored(n_nodes, 0);
  if (cfg.persistent_silence) {
    std::mt19937_64 rng(derive_seed(cfg.seed, kSilenceSalt));
    std::bernoulli_distribution silent(cfg.silent_prob);
    for (auto& flag : unmonitored) flag = silent(rng) ? 1 : 0;
  }
  std::vector<std::optional<Cascade>> class_cascade(static_cast<std::size_t>(cfg.failure_classes));
  std::set<NodeId> busy;  // nodes of the concurrent failure in an overlapping pair
  for (int k = 0; k < cfg.n_failures; ++k) {
    std::mt19937_64 rng(derive_seed(cfg.seed, kFailureSalt + static_cast<std::uint64_t>(k)));
    FailureTruth f;
    f.id = k;
    f.failure_class = k % cfg.failure_classes;
    f.profile = k < cfg.ramp_failures ? FailureProfile::kRamp : FailureProfile::kBurst;
    const int slot = cfg.failure_overlap ? k / 2 : k;
    const Minute start = cfg.first_failure_minute + static_cast<Minute>(slot) * spacing + spacing / 2;
    f.window = FailureWindow{start, start + failure_span(cfg, f.profile) - 1};
    if (!cfg.failure_overlap || k % 2 == 0) busy.clear();

    auto& recurring = class_cascade[static_cast<std::size_t>(f.failure_class)];
    auto clashes = [&busy](const Cascade& x) {
      return std::any_of(x.affected.begin(), x.affected.end(), [&busy](NodeId v) { return busy.count(v) != 0; });
    };
    Cascade c;
    if (cfg.recurring_cascades && recurring && !clashes(*recurring)) {
      c = *recurring;
    } else {
      std::uniform_int_distribution<NodeId> pick_root(0, n_nodes - 1);
      for (int attempt = 0;; ++attempt) {
        if (attempt == 10000) throw ValidationError("no root yields a cascade of min_affected nodes");
        const NodeId root = pick_root(rng);
        if (busy.count(root)) continue;
        c = spread(topo, root, cfg, busy, rng);
        if (static_cast<int>(c.affected.size()) >= cfg.min_affected) break;
      }
      if (!recurring) recurring = c;
    }
    f.root = c.affected.front();
    f.affected = c.affected;
    f.hops = c.hops;
    busy.insert(c.affected.begin(), c.affected.end());

    std::vector<std::string> slots;
    if (cfg.vocabulary == VocabularyScope::kTier) {
      for (int h : f.hops) slots.push_back("t" + std::to_string(h));
    } else {
      for (NodeId v : f.affected) slots.push_back(topo.name(v));
    }
    for (int tier = 0; cfg.vocabulary == VocabularyScope::kTier && tier <= cfg.max_hops; ++tier) {
      for (int t = 0; t < cfg.types_per_slot; ++t) f.vocabulary.push_back(class_type(f.failure_class, "t" + std::to_string(tier), t));
    }
    for (std::size_t a = 0; cfg.vocabulary == VocabularyScope::kNode && a < slots.size(); ++a) {
      for (int t = 0; t < cfg.types_per_slot; ++t) f.vocabulary.push_back(class_type(f.failure_class, slots[a], t));
    }

    std::bernoulli_distribution silent(cfg.silent_prob);
    std::vector<std::size_t> reporting;
    for (std::size_t a = 0; a < f.affected.size(); ++a) {
      if (cfg.persistent_silence ? unmonitored[f.affected[a]] != 0 : silent(rng)) {
        f.silent.push_back(f.affected[a]);
      } else {
        reporting.push_back(a);
      }
    }
    if (reporting.empty()) {
      reporting.push_back(0);
      f.silent.erase(std::find(f.silent.begin(), f.silent.end(), f.root));
    }
    std::sort(f.silent.begin(), f.silent.end());

    std::uniform_int_distribution<int> pick_type(0, cfg.types_per_slot - 1);
    std::uniform_int_distribution<int> pick_sev(1, 3);
    auto emit = [&](std::size_t a, Minute minute) {
      const std::string type = class_type(f.failure_class, slots[a], pick_type(rng));
      emitted.push_back(Emitted{IncidentRecord{minute, f.affected[a], 0, pick_sev(rng)}, type, k});
    };
    if (f.profile == FailureProfile::kBurst) {
      std::uniform_int_distribution<Minute> when(f.window.start, f.window.end);
      for (std::size_t a : reporting) {
        const int count = 1 + poisson(rng, cfg.incidents_per_failure_node - 1.0);
        for (int e = 0; e < count; ++e) emit(a, when(rng));
      }
    } else {
      std::uniform_int_distribution<std::size_t> who(0, reporting.size() - 1);
      const int span = failure_span(cfg, f.profile);
      for (int m = 0; m < span; ++m) {
        const double rate = cfg.ramp_peak * std::min(1.0, static_cast<double>(m + 1) / cfg.ramp_minutes);
        const int count = poisson(rng, rate);
        for (int e = 0; e < count; ++e) emit(reporting[who(rng)], f.window.start + m);
      }
    }
    sc.truth.failures.push_back(std::move(f));
  }

  if (cfg.noise_rate > 0.0) {
    std::mt19937_64 rng(derive_seed(cfg.seed, kNoiseSalt));
    std::vector<std::string> pool;
    for (int k = 0; k < cfg.noise_vocab; ++k) pool.push_back(noise_type(k));
    if (cfg.shared_noise) {
      for (const auto& f : sc.truth.failures) pool.insert(pool.end(), f.vocabulary.begin(), f.vocabulary.end());
      std::sort(pool.begin(), pool.end());
      pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (Minute m = 0; m < cfg.duration_minutes; ++m) {
      for (NodeId v = 0; v < n_nodes; ++v) {
        const int count = poisson(rng, cfg.noise_rate);
        for (int e = 0; e < count; ++e) emitted.push_back(Emitted{IncidentRecord{m, v, 0, 1}, pool[pick(rng)], kNoise});
      }
    }
  }

  std::stable_sort(emitted.begin(), emitted.end(),
                   [](const Emitted& a, const Emitted& b) { return a.record.minute < b.record.minute; });
  for (const auto& e : emitted) {
    sc.incidents.append(e.record.minute, e.record.node, e.type, e.record.severity);
    sc.truth.labels.push_back(e.label);
  }

  std::mt19937_64 kpi_rng(derive_seed(cfg.seed, kKpiSalt));
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::map<std::pair<NodeId, std::string>, std::vector<double>> series;
  for (NodeId v = 0; v < n_nodes; ++v) {
    for (const auto& name : cfg.kpi_names) {
      auto& values = series[{v, name}];
      values.resize(static_cast<std::size_t>(cfg.duration_minutes));
      for (auto& x : values) x = cfg.kpi_baseline + cfg.kpi_jitter * jitter(kpi_rng);
    }
  }
  for (const auto& f : sc.truth.failures) {
    std::mt19937_64 rng(derive_seed(cfg.seed, kFailureSalt + 1000 + static_cast<std::uint64_t>(f.id)));
    std::uniform_int_distribution<int> lag(0, cfg.kpi_lag_max);
    std::normal_distribution<double> pulse_noise(0.0, 0.05 * cfg.kpi_pulse);
    for (NodeId v : f.affected) {
      const int shift = lag(rng);
      for (const auto& name : cfg.kpi_names) {
        auto& values = series[{v, name}];
        for (Minute m = f.window.start + shift; m <= f.window.end + shift && m < cfg.duration_minutes; ++m) {
          values[static_cast<std::size_t>(m)] += cfg.kpi_pulse + pulse_noise(rng);
        }
      }
    }
  }
  for (auto& [key, values] : series) sc.kpis.add(KpiSeries{key.first, key.second, 0, std::move(values)});
  return sc;
}

void save_scenario(const std::filesystem::path& dir, const Scenario& scenario) {
  std::filesystem::create_directories(dir);
  io::save_topology(dir / "topology.txt", scenario.topology);
  io::save_incidents(dir / "incidents.txt", scenario.incidents, scenario.topology);
  io::save_kpis(dir / "kpis.txt", scenario.kpis, scenario.topology);
  io::save_ground_truth(dir / "ground_truth.txt", scenario.truth.labels);
  io::save_windows(dir / "truth_windows.txt", scenario.truth.windows());
  std::ostringstream out;
  out << "# id,class,profile,start,end,root,affected,silent\n";
  auto join = [&](const std::vector<NodeId>& nodes) {
    std::string s;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += (i ? ";" : "") + scenario.topology.name(nodes[i]);
    return s;
  };
  for (const auto& f : scenario.truth.failures) {
    out << f.id << ',' << f.failure_class << ',' << (f.profile == FailureProfile::kRamp ? "ramp" : "burst") << ','
        << f.window.start << ',' << f.window.end << ',' << scenario.topology.name(f.root) << ',' << join(f.affected)
        << ',' << join(f.silent) << '\n';
  }
  io::write_file(dir / "failures.txt", out.str());
}

LabelAlignment label_clustering(const std::vector<int>& group_ids, const std::vector<std::size_t>& indices,
                                const std::vector<int>& labels) {
  if (group_ids.size() != indices.size()) throw ValidationError("group ids and indices differ in length");
  LabelAlignment out;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= labels.size()) {
      throw LookupError("grouped incident " + std::to_string(indices[i]) + " has no ground-truth label");
    }
    const int label = labels[indices[i]];
    if (label == kNoise) continue;
    out.clusters.push_back(group_ids[i]);
    out.classes.push_back(label);
    out.indices.push_back(indices[i]);
  }
  return out;
}

LabelAlignment label_clustering(const std::vector<online::IncidentGroup>& groups, const std::vector<int>& labels) {
  std::vector<int> ids;
  std::vector<std::size_t> indices;
  for (const auto& g : groups) {
    for (const auto& m : g.members) {
      ids.push_back(g.id);
      indices.push_back(m.index);
    }
  }
  return label_clustering(ids, indices, labels);
}

}  // namespace incagg::sim
