#pragma once

#include <span>
#include <vector>

#include "incagg/records.hpp"

namespace incagg::metrics {

struct DetectionScore {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// A predicted window is a true positive when it overlaps a not yet matched
/// truth window; predictions are matched greedily by start time.
DetectionScore score_detection(const std::vector<FailureWindow>& predicted,
                               const std::vector<FailureWindow>& truth);

/// 2 I(A;B) / (H(A) + H(B)) in nats. 1 when both entropies vanish, 0 when
/// exactly one does. Throws ValidationError on length mismatch or empty input.
double nmi(std::span<const int> clusters, std::span<const int> classes);

}  // namespace incagg::metrics
