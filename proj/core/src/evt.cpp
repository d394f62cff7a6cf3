#include "incagg/evt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "incagg/error.hpp"

namespace incagg::detect {

void validate(const EvtConfig& cfg) {
  if (!(cfg.risk_q > 0.0 && cfg.risk_q < 1.0)) throw ValidationError("risk_q must lie in (0, 1)");
  if (!(cfg.peak_frac > 0.0 && cfg.peak_frac < 1.0)) throw ValidationError("peak_frac must lie in (0, 1)");
  if (cfg.calib_n == 0) throw ValidationError("calibration length must be positive");
  if (cfg.min_peaks < 2) throw ValidationError("min_peaks must be at least 2");
}

double empirical_quantile(std::span<const double> sample, double p) {
  if (sample.empty()) throw ValidationError("quantile of an empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<long long>(std::ceil(p * n));
  rank = std::clamp<long long>(rank, 1, static_cast<long long>(sorted.size()));
  return sorted[static_cast<std::size_t>(rank - 1)];
}

GpdFit fit_gpd_moments(std::span<const double> excesses) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (excesses.size() < 2) return {nan, nan};
  double mean = 0.0;
  for (double y : excesses) mean += y;
  mean /= static_cast<double>(excesses.size());
  double var = 0.0;
  for (double y : excesses) var += (y - mean) * (y - mean);
  var /= static_cast<double>(excesses.size() - 1);
  if (!(var > 0.0) || !(mean > 0.0)) return {nan, nan};
  const double ratio = mean * mean / var;
  return {0.5 * (1.0 - ratio), 0.5 * mean * (1.0 + ratio)};
}

EvtDetector::EvtDetector(EvtConfig cfg) : cfg_(cfg) { validate(cfg_); }

void EvtDetector::calibrate(std::span<const double> sample) {
  if (sample.size() < cfg_.calib_n) {
    throw ValidationError("calibration needs " + std::to_string(cfg_.calib_n) + " points, got " +
                          std::to_string(sample.size()));
  }
  const auto head = sample.first(cfg_.calib_n);
  for (double x : head) {
    if (std::isnan(x)) throw ValidationError("NaN in calibration sample");
  }
  n_ = head.size();
  t_ = empirical_quantile(head, 1.0 - cfg_.peak_frac);
  fallback_z_ = empirical_quantile(head, 1.0 - cfg_.risk_q);
  peaks_.clear();
  for (double x : head) {
    if (x > t_) peaks_.push_back(x - t_);
  }
  calibrated_ = true;
  refit();
}

void EvtDetector::refit() {
  fallback_ = true;
  z_ = fallback_z_;
  if (peaks_.size() < cfg_.min_peaks) return;
  const GpdFit fit = fit_gpd_moments(peaks_);
  if (!std::isfinite(fit.shape) || !std::isfinite(fit.scale) || fit.scale <= 0.0) return;
  const double n_t = static_cast<double>(peaks_.size());
  const double r = cfg_.risk_q * static_cast<double>(n_) / n_t;
  double z;
  if (std::abs(fit.shape) < 1e-9) {
    z = t_ - fit.scale * std::log(r);
  } else {
    z = t_ + (fit.scale / fit.shape) * (std::pow(r, -fit.shape) - 1.0);
  }
  if (!std::isfinite(z)) return;
  fit_ = fit;
  fallback_ = false;
  z_ = std::max(z, t_);
}

Verdict EvtDetector::observe(double x) {
  if (std::isnan(x)) throw ValidationError("NaN observation");
  if (!calibrated_) throw ValidationError("detector observed before calibration");
  if (x > z_) return Verdict::kAnomalous;
  ++n_;
  if (x > t_) {
    peaks_.push_back(x - t_);
    refit();
  }
  return Verdict::kNormal;
}

}  // namespace incagg::detect
