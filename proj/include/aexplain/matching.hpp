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

#ifndef AEXPLAIN_MATCHING_HPP_
#define AEXPLAIN_MATCHING_HPP_

#include <map>
#include <string>
#include <vector>

#include "aexplain/constraints.hpp"
#include "aexplain/knowledge.hpp"

namespace aexplain {

struct MatchConfig {
  // A quantitative feature is consistent with a representation when their
  // degree distance stays below theta; the bare definition's bound (< 1) is
  // usually too loose.
  double theta = 0.9;
  // Degree intervals are clamped here before interval arithmetic.
  MetricDomain clamp;
};

// Distance between two degree intervals after clamping: one minus the ratio
// of intersection length to union length. Identical clamped intervals give 0
// (also for degenerate points); distinct intervals with measure-zero overlap
// give 1.
double interval_distance(double lo_a, double hi_a, double lo_b, double hi_b,
                         const MetricDomain& clamp);

// Anomaly distance between a detected feature and a representation of the
// same constraint: interval distance for quantitative degrees, |F_r - F| for
// qualitative ones. Mismatched degree kinds count as completely different
// (distance 1). Throws ConstraintMismatch when the constraint ids differ.
double anomaly_distance(const ViolationFeature& v, const Representation& r,
                        const MatchConfig& cfg);

// Qualitative: distance 0. Quantitative: distance < theta.
bool is_consistent(const ViolationFeature& v, const Representation& r,
                   const MatchConfig& cfg);

// True when the feature's sequences lie inside the representation's sequence
// set on the same constraint. For jointly-reported features this is exact set
// equality; split-mode features match the multi-sequence representation they
// came from.
bool signature_matches(const ViolationFeature& v, const Representation& r);

// Existence test only (no distance): some representation anywhere in the
// knowledge set shares the feature's sequences and constraint.
bool is_explicable(const ViolationFeature& v, const KnowledgeSet& ks);

struct SetBEntry {
  std::string event_id;
  std::string constraint_id;
  std::vector<std::string> sequences;
};

// Bidirectional cover relation between features and explanations, plus the
// confusion-matrix partition: explicable features (Set A), features no
// representation mentions (Set C), representations nothing fired for (Set B).
struct CoverMap {
  std::vector<std::size_t> explicable;    // V*, sorted feature indices
  std::vector<std::size_t> inexplicable;  // Set C, sorted
  std::map<std::string, std::vector<std::size_t>> cover;  // R.cover per event
  std::vector<std::vector<std::string>> cover_ae;  // CoverAE per feature index
  std::vector<SetBEntry> unmatched_knowledge;      // Set B

  bool covered(std::size_t feature_index) const {
    return !cover_ae[feature_index].empty();
  }
};

CoverMap build_cover_map(const std::vector<ViolationFeature>& features,
                         const KnowledgeSet& ks, const MatchConfig& cfg);

}  // namespace aexplain

#endif  // AEXPLAIN_MATCHING_HPP_
