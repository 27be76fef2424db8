// Copyright 2026 The aexplain Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AEXPLAIN_TIME_SERIES_HPP_
#define AEXPLAIN_TIME_SERIES_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace aexplain {

using Timestamp = std::int64_t;  // epoch milliseconds

struct Sample {
  Timestamp t;
  double x;
};

struct TimeInterval {
  Timestamp lo;
  Timestamp hi;

  bool contains(Timestamp t) const { return lo <= t && t <= hi; }
  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

// One sensor's readings, stored as parallel time/value arrays so the scan
// kernels can run over contiguous memory. Timestamps are strictly increasing.
class Sequence {
 public:
  Sequence() = default;
  // Validates monotonic timestamps and finite values.
  Sequence(std::string sensor_id, std::vector<Timestamp> times,
           std::vector<double> values);

  // Skips validation. For tests that need to build broken sequences.
  static Sequence unchecked(std::string sensor_id,
                            std::vector<Timestamp> times,
                            std::vector<double> values);

  const std::string& sensor_id() const { return sensor_id_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }

  std::span<const Timestamp> times() const { return times_; }
  std::span<const double> values() const { return values_; }
  Sample at(std::size_t n) const { return {times_[n], values_[n]}; }

  // Index of the first sample with t >= bound (== size() when none).
  std::size_t lower_bound(Timestamp bound) const;

  Sequence slice(const TimeInterval& interval) const;

  friend bool operator==(const Sequence&, const Sequence&) = default;

 private:
  std::string sensor_id_;
  std::vector<Timestamp> times_;
  std::vector<double> values_;
};

// The M-dimensional series of one equipment group. Sequences are aligned on
// the union of their timestamps; a sensor without a reading at an axis point
// is simply absent there (nothing is interpolated).
class SeriesBundle {
 public:
  SeriesBundle() = default;
  SeriesBundle(std::string equipment_id, std::vector<Sequence> sequences);

  // Skips axis construction so tests can assemble misaligned bundles.
  static SeriesBundle unchecked(std::string equipment_id,
                                std::vector<Sequence> sequences,
                                std::vector<Timestamp> time_axis);

  const std::string& equipment_id() const { return equipment_id_; }
  std::size_t dimension() const { return sequences_.size(); }
  const std::vector<Sequence>& sequences() const { return sequences_; }
  std::span<const Timestamp> time_axis() const { return time_axis_; }

  const Sequence* find(const std::string& sensor_id) const;
  bool has(const std::string& sensor_id) const { return find(sensor_id) != nullptr; }

  // Full extent of the time axis; nullopt for an empty bundle.
  std::optional<TimeInterval> extent() const;

  // True when a slice produced no samples at all.
  bool empty_window() const { return empty_window_; }

  friend bool operator==(const SeriesBundle& a, const SeriesBundle& b) {
    return a.equipment_id_ == b.equipment_id_ && a.sequences_ == b.sequences_;
  }

 private:
  friend SeriesBundle slice_window(const SeriesBundle&, const TimeInterval&);

  std::string equipment_id_;
  std::vector<Sequence> sequences_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Timestamp> time_axis_;
  bool empty_window_ = false;
};

// Restricts every sequence to samples with interval.lo <= t <= interval.hi.
// The sequence set itself is unchanged; an all-empty result is flagged via
// SeriesBundle::empty_window(), not treated as a failure.
SeriesBundle slice_window(const SeriesBundle& bundle, const TimeInterval& interval);

struct SequenceStats {
  std::string sensor_id;
  std::size_t n = 0;
  double min_value = 0.0;
  double max_value = 0.0;
  bool monotonic_time = true;
};

struct ValidationReport {
  std::vector<SequenceStats> per_sequence;
  std::vector<std::string> defects;

  bool ok() const { return defects.empty(); }
};

// Report-only consistency check; never mutates and never throws.
ValidationReport validate_series(const SeriesBundle& bundle);

}  // namespace aexplain

#endif  // AEXPLAIN_TIME_SERIES_HPP_
