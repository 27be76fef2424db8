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

#ifndef AEXPLAIN_DETECT_HPP_
#define AEXPLAIN_DETECT_HPP_

#include <optional>
#include <string>
#include <vector>

#include "aexplain/constraints.hpp"
#include "aexplain/time_series.hpp"

namespace aexplain {

struct DetectOptions {
  // When set, a multi-sequence violation is reported as one feature per
  // involved sequence instead of a single joint feature (the representation
  // used by the greedynC/MFnC baselines).
  bool split_multi_sequence = false;
  // Worker threads for constraint evaluation; output order is normalized
  // regardless of schedule.
  unsigned threads = 1;
};

struct EvalOutcome {
  std::optional<ViolationFeature> feature;
  // Set when the constraint was skipped (e.g. fewer samples than window_len).
  std::optional<std::string> note;
};

// Checks one constraint over the bundle restricted to `interval` and returns
// the violation feature when at least one point or window breaks the check.
// Quantitative degrees are the min/max normalized excess over violating
// points, clamped to the constraint's metric domain. Throws MissingSensor
// when the bundle lacks a domain sensor.
EvalOutcome evaluate_constraint(const Constraint& constraint,
                                const SeriesBundle& bundle,
                                const TimeInterval& interval);

struct DetectionReport {
  std::vector<ViolationFeature> features;  // ordered by (constraint, sequences)
  std::vector<std::string> notes;          // skipped/failed constraints
};

// VioDetect: evaluates the whole catalog; per-constraint errors are collected
// into the report instead of aborting the run.
DetectionReport detect_violations(const ConstraintCatalog& catalog,
                                  const SeriesBundle& bundle,
                                  const TimeInterval& interval,
                                  const DetectOptions& options = {});
DetectionReport detect_violations(const ConstraintCatalog& catalog,
                                  const SeriesBundle& bundle,
                                  const DetectOptions& options = {});

std::string features_to_json(const std::vector<ViolationFeature>& features,
                             int indent = 2);
std::vector<ViolationFeature> features_from_json(const std::string& json_text);

}  // namespace aexplain

#endif  // AEXPLAIN_DETECT_HPP_
