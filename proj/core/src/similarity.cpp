#include "incagg/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "incagg/error.hpp"

namespace incagg::impact {

TypeMultiset make_multiset(std::span<const TypeId> types) {
  TypeMultiset m;
  for (TypeId t : types) ++m[t];
  return m;
}

double incident_similarity(const TypeMultiset& a, const TypeMultiset& b) {
  long long inter = 0, uni = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      uni += ia->second;
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      uni += ib->second;
      ++ib;
    } else {
      inter += std::min(ia->second, ib->second);
      uni += std::max(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

struct Cell {
  double cost;
  std::size_t len;
};

bool better(const Cell& a, const Cell& b) { return a.cost < b.cost || (a.cost == b.cost && a.len < b.len); }

}  // namespace

double dtw_distance(std::span<const double> u, std::span<const double> v) {
  if (u.empty() || v.empty()) throw ValidationError("DTW needs non-empty sequences");
  const std::size_t m = v.size();
  std::vector<Cell> prev(m), cur(m);
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double c = std::abs(u[i] - v[j]);
      if (i == 0 && j == 0) {
        cur[j] = {c, 1};
        continue;
      }
      Cell best{std::numeric_limits<double>::infinity(), 0};
      if (i > 0 && j > 0 && better(prev[j - 1], best)) best = prev[j - 1];
      if (i > 0 && better(prev[j], best)) best = prev[j];
      if (j > 0 && better(cur[j - 1], best)) best = cur[j - 1];
      cur[j] = {best.cost + c, best.len + 1};
    }
    std::swap(prev, cur);
  }
  const Cell& end = prev[m - 1];
  return end.cost / static_cast<double>(end.len);
}

std::vector<double> z_normalize(std::span<const double> x) {
  std::vector<double> out(x.size(), 0.0);
  if (x.empty()) return out;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  const double sd = std::sqrt(var);
  if (!(sd > 0.0)) return out;
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = (x[k] - mean) / sd;
  return out;
}

double kpi_trend_similarity(NodeId i, NodeId j, Minute from, Minute to, const KpiStore& kpis,
                            const AbnormalKpis& abnormal) {
  auto ai = abnormal.find(i);
  auto aj = abnormal.find(j);
  if (ai == abnormal.end() || aj == abnormal.end()) return 0.0;
  double total = 0.0;
  int shared = 0;
  for (const auto& name : ai->second) {
    if (!aj->second.count(name)) continue;
    const KpiSeries* si = kpis.find(i, name);
    const KpiSeries* sj = kpis.find(j, name);
    if (!si || !sj) continue;
    const auto xi = slice(*si, from, to);
    const auto xj = slice(*sj, from, to);
    if (xi.empty() || xj.empty()) continue;
    total += 1.0 / (1.0 + dtw_distance(z_normalize(xi), z_normalize(xj)));
    ++shared;
  }
  return shared == 0 ? 0.0 : total / shared;
}

double edge_weight(double jaccard, double dtw_similarity, double alpha) {
  return alpha * jaccard + (1.0 - alpha) * dtw_similarity;
}

}  // namespace incagg::impact
