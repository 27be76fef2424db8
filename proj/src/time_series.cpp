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

#include "aexplain/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "aexplain/errors.hpp"
#include "aexplain/kernels.hpp"

namespace aexplain {

Sequence::Sequence(std::string sensor_id, std::vector<Timestamp> times,
                   std::vector<double> values)
    : sensor_id_(std::move(sensor_id)),
      times_(std::move(times)),
      values_(std::move(values)) {
  if (times_.size() != values_.size()) {
    throw Error(ErrorKind::kSchemaError,
                "sequence '" + sensor_id_ + "': time/value length mismatch");
  }
  for (std::size_t n = 0; n < times_.size(); ++n) {
    if (!std::isfinite(values_[n])) {
      throw Error(ErrorKind::kMalformedRow,
                  "sequence '" + sensor_id_ + "': non-finite value at index " +
                      std::to_string(n));
    }
    if (n > 0 && times_[n] <= times_[n - 1]) {
      throw Error(ErrorKind::kNonMonotonicTime,
                  "sequence '" + sensor_id_ + "': timestamp " +
                      std::to_string(times_[n]) + " at index " +
                      std::to_string(n) + " does not increase");
    }
  }
}

Sequence Sequence::unchecked(std::string sensor_id,
                             std::vector<Timestamp> times,
                             std::vector<double> values) {
  Sequence s;
  s.sensor_id_ = std::move(sensor_id);
  s.times_ = std::move(times);
  s.values_ = std::move(values);
  return s;
}

std::size_t Sequence::lower_bound(Timestamp bound) const {
  return static_cast<std::size_t>(
      std::lower_bound(times_.begin(), times_.end(), bound) - times_.begin());
}

Sequence Sequence::slice(const TimeInterval& interval) const {
  const std::size_t lo = lower_bound(interval.lo);
  std::size_t hi = lo;
  while (hi < times_.size() && times_[hi] <= interval.hi) ++hi;
  Sequence out;
  out.sensor_id_ = sensor_id_;
  out.times_.assign(times_.begin() + lo, times_.begin() + hi);
  out.values_.assign(values_.begin() + lo, values_.begin() + hi);
  return out;
}

SeriesBundle::SeriesBundle(std::string equipment_id,
                           std::vector<Sequence> sequences)
    : equipment_id_(std::move(equipment_id)), sequences_(std::move(sequences)) {
  for (std::size_t i = 0; i < sequences_.size(); ++i) {
    auto [it, inserted] = index_.emplace(sequences_[i].sensor_id(), i);
    if (!inserted) {
      throw Error(ErrorKind::kSchemaError,
                  "duplicate sensor id '" + sequences_[i].sensor_id() + "'");
    }
  }
  // Union of per-sequence timestamps, kept sorted.
  for (const Sequence& s : sequences_) {
    time_axis_.insert(time_axis_.end(), s.times().begin(), s.times().end());
  }
  std::sort(time_axis_.begin(), time_axis_.end());
  time_axis_.erase(std::unique(time_axis_.begin(), time_axis_.end()),
                   time_axis_.end());
}

SeriesBundle SeriesBundle::unchecked(std::string equipment_id,
                                     std::vector<Sequence> sequences,
                                     std::vector<Timestamp> time_axis) {
  SeriesBundle b;
  b.equipment_id_ = std::move(equipment_id);
  b.sequences_ = std::move(sequences);
  b.time_axis_ = std::move(time_axis);
  for (std::size_t i = 0; i < b.sequences_.size(); ++i) {
    b.index_.emplace(b.sequences_[i].sensor_id(), i);
  }
  return b;
}

const Sequence* SeriesBundle::find(const std::string& sensor_id) const {
  auto it = index_.find(sensor_id);
  return it == index_.end() ? nullptr : &sequences_[it->second];
}

std::optional<TimeInterval> SeriesBundle::extent() const {
  if (time_axis_.empty()) return std::nullopt;
  return TimeInterval{time_axis_.front(), time_axis_.back()};
}

SeriesBundle slice_window(const SeriesBundle& bundle,
                          const TimeInterval& interval) {
  if (interval.lo > interval.hi) {
    throw Error(ErrorKind::kUsageError, "slice_window: interval.lo > interval.hi");
  }
  std::vector<Sequence> sliced;
  sliced.reserve(bundle.dimension());
  bool any = false;
  for (const Sequence& s : bundle.sequences()) {
    sliced.push_back(s.slice(interval));
    any = any || !sliced.back().empty();
  }
  SeriesBundle out(bundle.equipment_id(), std::move(sliced));
  out.empty_window_ = !any;
  return out;
}

ValidationReport validate_series(const SeriesBundle& bundle) {
  ValidationReport report;
  for (const Sequence& s : bundle.sequences()) {
    SequenceStats stats;
    stats.sensor_id = s.sensor_id();
    stats.n = s.size();
    if (s.empty()) {
      report.defects.push_back("empty sequence: " + s.sensor_id());
    } else {
      const auto mm = kernels::active().min_max(s.values().data(), s.size());
      stats.min_value = mm.lo;
      stats.max_value = mm.hi;
    }
    auto times = s.times();
    for (std::size_t n = 0; n < s.size(); ++n) {
      if (n > 0 && times[n] <= times[n - 1]) {
        stats.monotonic_time = false;
        report.defects.push_back("non-monotonic time in sequence " +
                                 s.sensor_id());
        break;
      }
    }
    for (std::size_t n = 0; n < s.size(); ++n) {
      if (!std::isfinite(s.values()[n])) {
        report.defects.push_back("non-finite value in sequence " +
                                 s.sensor_id());
        break;
      }
    }
    // Axis mismatch: a timestamp the bundle's axis does not know about
    // (possible only for bundles assembled unsafely in tests).
    auto axis = bundle.time_axis();
    for (Timestamp t : times) {
      if (!std::binary_search(axis.begin(), axis.end(), t)) {
        report.defects.push_back("axis mismatch in sequence " + s.sensor_id());
        break;
      }
    }
    report.per_sequence.push_back(stats);
  }
  return report;
}

}  // namespace aexplain
