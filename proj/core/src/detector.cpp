#include "incagg/detector.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "incagg/error.hpp"

namespace incagg::detect {

std::vector<std::int64_t> count_per_minute(std::span<const IncidentRecord> incidents, Minute from, Minute to) {
  if (to < from) return {};
  std::vector<std::int64_t> counts(static_cast<std::size_t>(to - from + 1), 0);
  Minute prev = std::numeric_limits<Minute>::min();
  for (const auto& r : incidents) {
    if (r.minute < prev) throw ValidationError("incidents are not sorted by minute");
    prev = r.minute;
    if (r.minute >= from && r.minute <= to) ++counts[static_cast<std::size_t>(r.minute - from)];
  }
  return counts;
}

std::vector<FailureWindow> merge_runs(const std::vector<bool>& flagged, Minute first_minute) {
  std::vector<FailureWindow> out;
  std::size_t i = 0;
  while (i < flagged.size()) {
    if (!flagged[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < flagged.size() && flagged[j + 1]) ++j;
    out.push_back({first_minute + static_cast<Minute>(i), first_minute + static_cast<Minute>(j)});
    i = j + 1;
  }
  return out;
}

namespace {

std::vector<bool> evt_flags(std::span<const std::int64_t> counts, EvtDetector& detector) {
  std::vector<bool> flagged(counts.size(), false);
  std::size_t start = 0;
  if (!detector.calibrated()) {
    const std::size_t n = detector.config().calib_n;
    if (counts.size() < n) {
      throw ValidationError("series of " + std::to_string(counts.size()) + " minutes is shorter than the " +
                            std::to_string(n) + "-minute calibration period");
    }
    std::vector<double> sample(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(n));
    detector.calibrate(sample);
    start = n;
  }
  for (std::size_t i = start; i < counts.size(); ++i) {
    flagged[i] = detector.observe(static_cast<double>(counts[i])) == Verdict::kAnomalous;
  }
  return flagged;
}

std::vector<bool> fixed_flags(std::span<const std::int64_t> counts, std::int64_t threshold) {
  std::vector<bool> flagged(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) flagged[i] = counts[i] > threshold;
  return flagged;
}

}  // namespace

std::vector<FailureWindow> detect_failures(std::span<const std::int64_t> counts, EvtDetector& detector,
                                           Minute first_minute) {
  return merge_runs(evt_flags(counts, detector), first_minute);
}

std::vector<FailureWindow> fixed_threshold_detect(std::span<const std::int64_t> counts, std::int64_t threshold,
                                                  Minute first_minute) {
  return merge_runs(fixed_flags(counts, threshold), first_minute);
}

std::vector<FailureWindow> detect_log(const IncidentLog& log, const DetectOptions& opts, const PartitionKey& key) {
  const Minute from = opts.from;
  Minute to = opts.to;
  if (to < from) to = log.empty() ? from : std::max(from, log.records.back().minute);

  std::map<std::string, std::vector<IncidentRecord>> parts;
  if (key) {
    for (const auto& r : log.records) parts[key(r)].push_back(r);
  } else {
    parts[""] = log.records;
  }

  std::vector<bool> flagged(static_cast<std::size_t>(to - from + 1), false);
  for (const auto& [name, records] : parts) {
    const auto counts = count_per_minute(records, from, to);
    std::vector<bool> part_flags;
    if (opts.mode == DetectMode::kEvt) {
      EvtDetector detector(opts.evt);
      part_flags = evt_flags(counts, detector);
    } else {
      part_flags = fixed_flags(counts, opts.fixed_threshold);
    }
    for (std::size_t i = 0; i < flagged.size(); ++i) flagged[i] = flagged[i] || part_flags[i];
  }
  return merge_runs(flagged, from);
}

}  // namespace incagg::detect
