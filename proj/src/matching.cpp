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

#include "aexplain/matching.hpp"

#include <algorithm>

#include "aexplain/errors.hpp"

namespace aexplain {

double interval_distance(double lo_a, double hi_a, double lo_b, double hi_b,
                         const MetricDomain& clamp) {
  const double a0 = clamp.clamp(lo_a);
  const double a1 = clamp.clamp(hi_a);
  const double b0 = clamp.clamp(lo_b);
  const double b1 = clamp.clamp(hi_b);
  if (a0 == b0 && a1 == b1) return 0.0;  // identity before any ratio
  const double inter =
      std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
  const double uni = (a1 - a0) + (b1 - b0) - inter;
  if (uni <= 0.0) return 1.0;  // two distinct degenerate points
  return 1.0 - inter / uni;
}

double anomaly_distance(const ViolationFeature& v, const Representation& r,
                        const MatchConfig& cfg) {
  if (v.constraint_id != r.constraint_id) {
    throw Error(ErrorKind::kConstraintMismatch,
                "distance between feature on '" + v.constraint_id +
                    "' and representation on '" + r.constraint_id +
                    "' is undefined");
  }
  if (v.degree.quantitative != r.degree.quantitative) return 1.0;
  if (!v.degree.quantitative) {
    // Stored features always carry F = 1; representations assert violation.
    return 0.0;
  }
  return interval_distance(v.degree.lo, v.degree.hi, r.degree.lo, r.degree.hi,
                           cfg.clamp);
}

bool is_consistent(const ViolationFeature& v, const Representation& r,
                   const MatchConfig& cfg) {
  const double d = anomaly_distance(v, r, cfg);
  if (!v.degree.quantitative || !r.degree.quantitative) return d == 0.0;
  return d < cfg.theta;
}

bool signature_matches(const ViolationFeature& v, const Representation& r) {
  if (v.constraint_id != r.constraint_id) return false;
  // Both sides sorted; equality for joint features, subset for split ones.
  return std::includes(r.sequences.begin(), r.sequences.end(),
                       v.sequences.begin(), v.sequences.end());
}

bool is_explicable(const ViolationFeature& v, const KnowledgeSet& ks) {
  for (const Explanation& e : ks.events()) {
    for (const Representation& r : e.exact) {
      if (signature_matches(v, r)) return true;
    }
    for (const PossibleRep& p : e.possible) {
      if (signature_matches(v, p.rep)) return true;
    }
  }
  return false;
}

CoverMap build_cover_map(const std::vector<ViolationFeature>& features,
                         const KnowledgeSet& ks, const MatchConfig& cfg) {
  CoverMap cm;
  cm.cover_ae.resize(features.size());

  for (std::size_t i = 0; i < features.size(); ++i) {
    if (is_explicable(features[i], ks)) {
      cm.explicable.push_back(i);
    } else {
      cm.inexplicable.push_back(i);
    }
  }

  for (const Explanation& e : ks.events()) {
    std::vector<std::size_t> cover;
    auto try_rep = [&](const Representation& r, bool* matched_any) {
      for (std::size_t i : cm.explicable) {
        const ViolationFeature& v = features[i];
        if (!signature_matches(v, r)) continue;
        if (is_consistent(v, r, cfg)) cover.push_back(i);
      }
      if (matched_any != nullptr) {
        for (const ViolationFeature& v : features) {
          if (signature_matches(v, r)) {
            *matched_any = true;
            break;
          }
        }
      }
    };
    for (const Representation& r : e.exact) {
      bool matched = false;
      try_rep(r, &matched);
      if (!matched) {
        cm.unmatched_knowledge.push_back({e.event_id, r.constraint_id, r.sequences});
      }
    }
    for (const PossibleRep& p : e.possible) {
      bool matched = false;
      try_rep(p.rep, &matched);
      if (!matched) {
        cm.unmatched_knowledge.push_back(
            {e.event_id, p.rep.constraint_id, p.rep.sequences});
      }
    }
    std::sort(cover.begin(), cover.end());
    cover.erase(std::unique(cover.begin(), cover.end()), cover.end());
    for (std::size_t i : cover) cm.cover_ae[i].push_back(e.event_id);
    if (!cover.empty()) cm.cover[e.event_id] = std::move(cover);
  }

  for (auto& events : cm.cover_ae) std::sort(events.begin(), events.end());
  return cm;
}

}  // namespace aexplain
