#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace incagg::detect {

struct EvtConfig {
  double risk_q = 1e-3;        // target exceedance probability of z_q
  double peak_frac = 0.02;     // fraction of the sample above the peak threshold t
  std::size_t calib_n = 288;   // calibration length in minutes
  std::size_t min_peaks = 10;  // below this the GPD fit is not trusted
};

/// Throws ValidationError when a field is out of range.
void validate(const EvtConfig& cfg);

enum class Verdict { kNormal, kAnomalous };

/// Nearest-rank empirical quantile: sorted[ceil(p*n) - 1], clamped to the
/// sample. Exactly scale-equivariant for positive factors.
double empirical_quantile(std::span<const double> sample, double p);

struct GpdFit {
  double shape = 0.0;  // gamma
  double scale = 0.0;  // sigma
};

/// Method-of-moments Generalized Pareto fit to positive excesses:
/// gamma = (1 - mean^2/var)/2, sigma = mean (1 + mean^2/var)/2.
/// Returns non-finite fields when the moments are degenerate.
GpdFit fit_gpd_moments(std::span<const double> excesses);

/// Streaming peaks-over-threshold detector. The peak threshold t is an
/// empirical quantile of the calibration sample; the anomaly threshold z_q
/// extrapolates a GPD tail fitted to the excesses over t. Anomalous points
/// never update the model.
class EvtDetector {
 public:
  explicit EvtDetector(EvtConfig cfg = {});

  /// Uses the first calib_n points of `sample`; throws ValidationError if
  /// the sample is shorter.
  void calibrate(std::span<const double> sample);
  /// Throws ValidationError on NaN or when not calibrated.
  Verdict observe(double x);

  bool calibrated() const noexcept { return calibrated_; }
  bool using_fallback() const noexcept { return fallback_; }
  double peak_threshold() const noexcept { return t_; }
  double threshold() const noexcept { return z_; }
  std::size_t n_seen() const noexcept { return n_; }
  const std::vector<double>& peaks() const noexcept { return peaks_; }
  const GpdFit& fit() const noexcept { return fit_; }
  const EvtConfig& config() const noexcept { return cfg_; }

 private:
  void refit();

  EvtConfig cfg_;
  bool calibrated_ = false;
  bool fallback_ = false;
  double t_ = 0.0;
  double z_ = 0.0;
  double fallback_z_ = 0.0;
  std::size_t n_ = 0;
  std::vector<double> peaks_;
  GpdFit fit_;
};

}  // namespace incagg::detect
