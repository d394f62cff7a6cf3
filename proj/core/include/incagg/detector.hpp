#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "incagg/evt.hpp"
#include "incagg/records.hpp"

namespace incagg::detect {

/// Incident counts for each minute of [from, to]; zero-filled.
/// Throws ValidationError if the records are not sorted by minute.
std::vector<std::int64_t> count_per_minute(std::span<const IncidentRecord> incidents, Minute from,
                                           Minute to);

/// Maximal runs of flagged minutes, offset by `first_minute`.
std::vector<FailureWindow> merge_runs(const std::vector<bool>& flagged, Minute first_minute);

/// Calibrates `detector` on the first calib_n counts (unless it already is
/// calibrated) and observes the rest. Calibration minutes are never flagged.
std::vector<FailureWindow> detect_failures(std::span<const std::int64_t> counts, EvtDetector& detector,
                                           Minute first_minute = 0);

/// Baseline: flag minutes with count > threshold.
std::vector<FailureWindow> fixed_threshold_detect(std::span<const std::int64_t> counts,
                                                  std::int64_t threshold, Minute first_minute = 0);

enum class DetectMode { kEvt, kFixed };

struct DetectOptions {
  DetectMode mode = DetectMode::kEvt;
  EvtConfig evt;
  std::int64_t fixed_threshold = 50;
  Minute from = 0;
  Minute to = -1;  // < from means "last incident minute"
};

/// Partition key for per-zone detection; incidents sharing a key share a
/// detector.
using PartitionKey = std::function<std::string(const IncidentRecord&)>;

/// Runs one detector per partition (all incidents in one partition when
/// `key` is empty) and merges the flagged minutes into disjoint windows.
std::vector<FailureWindow> detect_log(const IncidentLog& log, const DetectOptions& opts,
                                      const PartitionKey& key = {});

}  // namespace incagg::detect
