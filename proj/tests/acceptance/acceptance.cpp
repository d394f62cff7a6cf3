// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "incagg/aggregator.hpp"
#include "incagg/detector.hpp"
#include "incagg/embedding.hpp"
#include "incagg/evt.hpp"
#include "incagg/louvain.hpp"
#include "incagg/metrics.hpp"
#include "incagg/pipeline.hpp"
#include "incagg/sgns.hpp"
#include "incagg/similarity.hpp"
#include "incagg/simulator.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace incagg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Outcome louvain_oracle() {
  Stopwatch clock;
  std::mt19937_64 rng(2024);
  std::bernoulli_distribution edge(0.45);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  const int instances = 200;
  int optimal = 0;
  bool below_singletons = false;
  for (int trial = 0; trial < instances; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    impact::WeightedGraph g(n);
    for (std::uint32_t a = 0; a < n; ++a) {
      for (std::uint32_t b = a + 1; b < n; ++b) {
        if (edge(rng)) g.add_edge(a, b, weight(rng));
      }
    }
    const auto part = impact::louvain(g, static_cast<std::uint64_t>(trial));
    impact::Partition singletons(n);
    for (std::uint32_t v = 0; v < n; ++v) singletons[v] = v;
    const double q = impact::modularity(g, part);
    if (q < impact::modularity(g, singletons) - 1e-12) below_singletons = true;
    if (std::abs(q - oracle::best_modularity(oracle::to_matrix(g))) <= 1e-9) ++optimal;
  }
  const double secs = clock.seconds();
  return {optimal >= instances * 95 / 100 && !below_singletons && secs < 30.0,
          fmt("%d/%d optimal within 1e-9, below singleton partition: %s, %.2f s", optimal, instances,
              below_singletons ? "yes" : "no", secs)};
}

Outcome dtw_oracle() {
  Stopwatch clock;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> len(1, 8);
  std::normal_distribution<double> val(0.0, 1.0);
  int equal = 0;
  const int pairs = 500;
  for (int trial = 0; trial < pairs; ++trial) {
    std::vector<double> u(len(rng)), v(len(rng));
    for (auto& x : u) x = val(rng);
    for (auto& x : v) x = val(rng);
    if (impact::dtw_distance(u, v) == oracle::dtw(u, v)) ++equal;
  }
  const double secs = clock.seconds();
  return {equal == pairs && secs < 10.0, fmt("%d/%d exactly equal, %.2f s", equal, pairs, secs)};
}

double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(na) + std::sqrt(nb);
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

Outcome sgns_gradient_check() {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> val(0.0, 0.7);
  const double h = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 1 + rng() % 16;
    const std::size_t k = 1 + rng() % 5;
    std::vector<double> c(dim), o(dim);
    std::vector<std::vector<double>> negs(k, std::vector<double>(dim));
    for (auto& x : c) x = val(rng);
    for (auto& x : o) x = val(rng);
    for (auto& n : negs) {
      for (auto& x : n) x = val(rng);
    }
    auto loss = [&] {
      std::vector<std::span<const double>> spans(negs.begin(), negs.end());
      return embed::sgns_loss(c, o, spans);
    };
    auto numeric = [&](std::vector<double>& target) {
      std::vector<double> g(target.size());
      for (std::size_t i = 0; i < target.size(); ++i) {
        const double keep = target[i];
        target[i] = keep + h;
        const double up = loss();
        target[i] = keep - h;
        const double down = loss();
        target[i] = keep;
        g[i] = (up - down) / (2 * h);
      }
      return g;
    };
    std::vector<std::span<const double>> spans(negs.begin(), negs.end());
    const auto g = embed::sgns_gradient(c, o, spans);
    worst = std::max(worst, rel_error(g.center, numeric(c)));
    worst = std::max(worst, rel_error(g.context, numeric(o)));
    for (std::size_t j = 0; j < k; ++j) worst = std::max(worst, rel_error(g.negatives[j], numeric(negs[j])));
  }

  std::normal_distribution<float> fval(0.0f, 1.0f);
  IncidentEmbedding emb(16);
  for (int t = 0; t < 50; ++t) {
    std::vector<float> v(16);
    for (auto& x : v) x = fval(rng);
    emb.add("t" + std::to_string(t), v);
  }
  double worst_row = 0.0;
  for (const auto& i : emb.types()) {
    double sum = 0.0;
    for (const auto& j : emb.types()) sum += emb_softmax(emb, i, j);
    worst_row = std::max(worst_row, std::abs(sum - 1.0));
  }
  return {worst <= 1e-6 && worst_row <= 1e-9,
          fmt("max relative gradient error %.2e, max softmax row deviation %.2e", worst, worst_row)};
}

Outcome evt_calibration() {
  const double exp_q = -std::log(1e-3);
  const double gauss_q = 3.090232306167813;
  int exp_ok = 0, gauss_ok = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> ex(1.0);
    std::normal_distribution<double> gs(0.0, 1.0);
    std::vector<double> a(10000), b(10000);
    for (auto& x : a) x = ex(rng);
    for (auto& x : b) x = gs(rng);
    detect::EvtDetector da(detect::EvtConfig{.risk_q = 1e-3, .calib_n = 10000});
    detect::EvtDetector db(detect::EvtConfig{.risk_q = 1e-3, .calib_n = 10000});
    da.calibrate(a);
    db.calibrate(b);
    if (std::abs(da.threshold() - exp_q) <= 0.15 * exp_q) ++exp_ok;
    if (std::abs(db.threshold() - gauss_q) <= 0.15 * gauss_q) ++gauss_ok;
  }
  return {exp_ok >= 18 && gauss_ok >= 18,
          fmt("exponential %d/20, gaussian %d/20 within 15%%", exp_ok, gauss_ok)};
}

Outcome detection_trend() {
  Stopwatch clock;
  int good = 0;
  double evt_f1 = 0, fixed_f1 = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    sim::ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.n_failures = 2;
    cfg.ramp_failures = 1;
    cfg.ramp_peak = 25.0;
    cfg.ramp_minutes = 10;
    cfg.failure_minutes = 2;
    cfg.incidents_per_failure_node = 40.0;
    cfg.max_hops = 1;
    cfg.duration_minutes = 900;
    const auto sc = sim::generate_scenario(cfg);
    const auto truth = sc.truth.windows();
    detect::DetectOptions opts;
    opts.to = cfg.duration_minutes - 1;
    const auto evt = metrics::score_detection(detect::detect_log(sc.incidents, opts), truth);
    opts.mode = detect::DetectMode::kFixed;
    const auto fixed = metrics::score_detection(detect::detect_log(sc.incidents, opts), truth);
    evt_f1 += evt.f1 / 10;
    fixed_f1 += fixed.f1 / 10;
    if (evt.f1 >= fixed.f1 && evt.recall == 1.0) ++good;
  }
  const double secs = clock.seconds();
  return {good >= 9 && secs < 60.0,
          fmt("%d/10 seeds with EVT F1 >= fixed F1 and EVT recall 1 (mean F1 %.3f vs %.3f), %.1f s", good,
              evt_f1, fixed_f1, secs)};
}

// Five recurring failure classes, 20 training and 5 evaluation failures.
std::string aggregation_config(std::uint64_t seed) {
  return "simulate=true\n"
         "seed=" + std::to_string(seed) + "\n"
         "sim.n_failures=25\n"
         "sim.failure_classes=5\n"
         "sim.silent_prob=0.3\n"
         "sim.shared_noise=false\n"
         "sim.noise_rate=0.005\n"
         "sim.incidents_per_failure_node=20\n"
         "sim.failure_minutes=6\n"
         "sim.kpi_lag_max=3\n"
         "sim.max_hops=1\n"
         "sim.min_affected=5\n"
         "sim.duration_minutes=3800\n";
}

pipeline::PipelineConfig parse_pipeline(const std::string& text) {
  std::istringstream in(text);
  return pipeline::pipeline_config_from(KeyValueConfig::parse(in));
}

double report_value(const pipeline::Report& r, const std::string& key) {
  for (const auto& [k, v] : r) {
    if (k == key) return std::stod(v);
  }
  return std::nan("");
}

struct EndToEnd {
  std::vector<double> full;
  std::vector<double> ablated;
  int eval_failures_ok = 0;
  double full_seconds = 0;
};

EndToEnd run_end_to_end() {
  EndToEnd r;
  Stopwatch clock;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto cfg = parse_pipeline(aggregation_config(seed));
    const auto sc = sim::generate_scenario(*cfg.scenario);
    const auto split_minute = static_cast<Minute>(cfg.split * cfg.scenario->duration_minutes);
    int eval = 0;
    for (const auto& f : sc.truth.failures) eval += f.window.start >= split_minute ? 1 : 0;
    if (eval == 5) ++r.eval_failures_ok;
    r.full.push_back(report_value(pipeline::run_pipeline(cfg, pipeline::Mode::kFull), "nmi"));
  }
  r.full_seconds = clock.seconds();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto cfg = parse_pipeline(aggregation_config(seed));
    r.ablated.push_back(report_value(pipeline::run_pipeline(cfg, pipeline::Mode::kNoCompletion), "nmi"));
  }
  return r;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += fmt("%s%.3f", s.empty() ? "" : " ", x);
  return s;
}

Outcome aggregation_quality(const EndToEnd& e) {
  int ok = 0;
  for (double x : e.full) ok += x >= 0.8 ? 1 : 0;
  return {ok >= 8 && e.eval_failures_ok == 10 && e.full_seconds < 300.0,
          fmt("%d/10 seeds with NMI >= 0.8 [%s], 20/5 split on %d/10 seeds, %.1f s", ok, list(e.full).c_str(),
              e.eval_failures_ok, e.full_seconds)};
}

Outcome ablation_trend(const EndToEnd& e) {
  int ok = 0;
  std::vector<double> gaps;
  for (std::size_t i = 0; i < e.full.size(); ++i) {
    gaps.push_back(e.full[i] - e.ablated[i]);
    ok += gaps.back() >= 0.05 ? 1 : 0;
  }
  return {ok >= 8, fmt("%d/10 seeds with a drop >= 0.05 [%s]", ok, list(gaps).c_str())};
}

Outcome formula_constants() {
  const double tr = online::topological_rescaling(6, 4);
  const std::vector<TypeId> aab{0, 0, 1}, abb{0, 1, 1};
  const double jac = impact::incident_similarity(impact::make_multiset(aab), impact::make_multiset(abb));
  impact::WeightedGraph g(6);
  for (std::uint32_t base : {0u, 3u}) {
    g.add_edge(base, base + 1, 1.0);
    g.add_edge(base + 1, base + 2, 1.0);
    g.add_edge(base, base + 2, 1.0);
  }
  const double q = impact::modularity(g, std::vector<std::uint32_t>{0, 0, 0, 1, 1, 1});
  const bool ok = std::abs(tr - 0.5) <= 1e-12 && std::abs(jac - 0.5) <= 1e-12 && std::abs(q - 0.5) <= 1e-12;
  return {ok, fmt("TR(6,4)=%.15g jaccard=%.15g modularity=%.15g", tr, jac, q)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto base = fs::temp_directory_path() / "incagg_acceptance_determinism";
  fs::remove_all(base);
  const auto cfg = parse_pipeline(aggregation_config(1));
  pipeline::run_pipeline(cfg, pipeline::Mode::kFull, base / "a");
  pipeline::run_pipeline(cfg, pipeline::Mode::kFull, base / "b");
  int files = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(base / "a")) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const auto twin = base / "b" / fs::relative(entry.path(), base / "a");
    if (!fs::exists(twin) || slurp(entry.path()) != slurp(twin)) ++differing;
  }
  int twins = 0;
  for (const auto& entry : fs::recursive_directory_iterator(base / "b")) twins += entry.is_regular_file() ? 1 : 0;
  fs::remove_all(base);
  return {files > 0 && differing == 0 && twins == files,
          fmt("%d artifacts compared, %d differ", files, differing + std::abs(twins - files))};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&failures](int id, const char* name, const Outcome& o) {
    std::printf("criterion %d %s: %s (%s)\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  };
  report(1, "louvain-oracle", louvain_oracle());
  report(2, "dtw-oracle", dtw_oracle());
  report(3, "sgns-gradient", sgns_gradient_check());
  report(4, "evt-calibration", evt_calibration());
  report(5, "detection-trend", detection_trend());
  const auto e2e = run_end_to_end();
  report(6, "aggregation-quality", aggregation_quality(e2e));
  report(7, "completion-ablation", ablation_trend(e2e));
  report(8, "formula-constants", formula_constants());
  report(9, "determinism", determinism());
  return failures == 0 ? 0 : 1;
}
