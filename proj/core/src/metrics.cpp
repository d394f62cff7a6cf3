#include "incagg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "incagg/error.hpp"

namespace incagg::metrics {

DetectionScore score_detection(const std::vector<FailureWindow>& predicted,
                               const std::vector<FailureWindow>& truth) {
  std::vector<FailureWindow> pred = predicted;
  std::stable_sort(pred.begin(), pred.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  std::vector<char> matched(truth.size(), 0);
  DetectionScore s;
  for (const auto& p : pred) {
    bool hit = false;
    for (std::size_t t = 0; t < truth.size(); ++t) {
      if (!matched[t] && p.overlaps(truth[t])) {
        matched[t] = 1;
        hit = true;
        break;
      }
    }
    if (hit) {
      ++s.tp;
    } else {
      ++s.fp;
    }
  }
  s.fn = static_cast<int>(std::count(matched.begin(), matched.end(), 0));
  s.precision = s.tp + s.fp > 0 ? static_cast<double>(s.tp) / (s.tp + s.fp) : 0.0;
  s.recall = s.tp + s.fn > 0 ? static_cast<double>(s.tp) / (s.tp + s.fn) : 0.0;
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

namespace {

double entropy(const std::map<int, double>& counts, double n) {
  double h = 0.0;
  for (const auto& [label, c] : counts) {
    const double p = c / n;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

double nmi(std::span<const int> clusters, std::span<const int> classes) {
  if (clusters.size() != classes.size()) throw ValidationError("label vectors differ in length");
  if (clusters.empty()) throw ValidationError("label vectors are empty");
  const auto n = static_cast<double>(clusters.size());
  std::map<int, double> a;
  std::map<int, double> b;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    a[clusters[i]] += 1.0;
    b[classes[i]] += 1.0;
    joint[{clusters[i], classes[i]}] += 1.0;
  }
  const double ha = entropy(a, n);
  const double hb = entropy(b, n);
  const bool flat_a = a.size() == 1;
  const bool flat_b = b.size() == 1;
  if (flat_a && flat_b) return 1.0;
  if (flat_a || flat_b) return 0.0;
  double mi = 0.0;
  for (const auto& [key, c] : joint) {
    mi += c / n * std::log(c * n / (a[key.first] * b[key.second]));
  }
  return std::clamp(2.0 * mi / (ha + hb), 0.0, 1.0);
}

}  // namespace incagg::metrics
