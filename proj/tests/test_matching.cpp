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

#include <doctest.h>

#include <random>

#include "aexplain/errors.hpp"

using namespace aexplain;

namespace {

ViolationFeature feature(const std::string& cid, std::vector<std::string> seqs,
                         double lo, double hi) {
  ViolationFeature f;
  f.constraint_id = cid;
  f.sequences = std::move(seqs);
  std::sort(f.sequences.begin(), f.sequences.end());
  f.degree = Degree::interval(lo, hi);
  f.interval = {0, 1000};
  return f;
}

ViolationFeature bool_feature(const std::string& cid, const std::string& seq) {
  ViolationFeature f;
  f.constraint_id = cid;
  f.sequences = {seq};
  f.degree = Degree::boolean();
  f.interval = {0, 1000};
  return f;
}

Representation rep(const std::string& cid, std::vector<std::string> seqs,
                   double lo, double hi) {
  Representation r;
  r.constraint_id = cid;
  r.sequences = std::move(seqs);
  std::sort(r.sequences.begin(), r.sequences.end());
  r.degree = Degree::interval(lo, hi);
  return r;
}

}  // namespace

TEST_CASE("the worked distance examples hold exactly") {
  MatchConfig cfg;
  // [0.1,0.3] vs [0.2,0.6]: intersection 0.1, union 0.5.
  CHECK(anomaly_distance(feature("c", {"S1"}, 0.1, 0.3),
                         rep("c", {"S1"}, 0.2, 0.6), cfg) ==
        doctest::Approx(0.8));
  CHECK(anomaly_distance(feature("c", {"S1"}, 0.1, 0.3),
                         rep("c", {"S1"}, 0.1, 0.3), cfg) == 0.0);
  CHECK(anomaly_distance(feature("c", {"S1"}, 0.0, 1.0),
                         rep("c", {"S1"}, 2.0, 3.0), cfg) == 1.0);

  ViolationFeature q = bool_feature("c", "S1");
  Representation rq;
  rq.constraint_id = "c";
  rq.sequences = {"S1"};
  rq.degree = Degree::boolean();
  CHECK(anomaly_distance(q, rq, cfg) == 0.0);
}

TEST_CASE("distance is symmetric in its interval arguments") {
  MatchConfig cfg;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-12.0, 12.0);
  for (int i = 0; i < 1000; ++i) {
    double a0 = d(rng), a1 = d(rng), b0 = d(rng), b1 = d(rng);
    if (a0 > a1) std::swap(a0, a1);
    if (b0 > b1) std::swap(b0, b1);
    const double ab = interval_distance(a0, a1, b0, b1, cfg.clamp);
    const double ba = interval_distance(b0, b1, a0, a1, cfg.clamp);
    CHECK(ab == ba);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
}

TEST_CASE("degenerate point intervals follow the stated rules") {
  MatchConfig cfg;
  // Identical points: identity rule fires before the ratio.
  CHECK(interval_distance(0.5, 0.5, 0.5, 0.5, cfg.clamp) == 0.0);
  // Distinct points: zero-measure union counts as completely different.
  CHECK(interval_distance(0.5, 0.5, 0.7, 0.7, cfg.clamp) == 1.0);
  // Point inside a non-degenerate interval: zero intersection measure.
  CHECK(interval_distance(0.5, 0.5, 0.0, 1.0, cfg.clamp) == 1.0);
}

TEST_CASE("infinite representation bounds are clamped before measuring") {
  MatchConfig cfg;
  const double inf = std::numeric_limits<double>::infinity();
  const double d = interval_distance(0.1, 0.2, -inf, 0.2, cfg.clamp);
  // Clamped to [-10, 0.2]: intersection 0.1, union 10.2.
  CHECK(d == doctest::Approx(1.0 - 0.1 / 10.2));
}

TEST_CASE("distance across different constraints is a caller bug") {
  MatchConfig cfg;
  CHECK_THROWS_AS(anomaly_distance(feature("c1", {"S1"}, 0, 1),
                                   rep("c2", {"S1"}, 0, 1), cfg),
                  Error);
}

TEST_CASE("consistency applies theta to quantitative degrees only") {
  MatchConfig cfg;
  cfg.theta = 0.9;
  CHECK(is_consistent(feature("c", {"S1"}, 0.1, 0.3),
                      rep("c", {"S1"}, 0.2, 0.6), cfg));  // 0.8 < 0.9
  cfg.theta = 0.5;
  CHECK_FALSE(is_consistent(feature("c", {"S1"}, 0.1, 0.3),
                            rep("c", {"S1"}, 0.2, 0.6), cfg));
  // Qualitative: distance 0 regardless of theta.
  ViolationFeature q = bool_feature("c", "S1");
  Representation rq;
  rq.constraint_id = "c";
  rq.sequences = {"S1"};
  rq.degree = Degree::boolean();
  cfg.theta = 0.01;
  CHECK(is_consistent(q, rq, cfg));
}

TEST_CASE("explicability needs a same-signature representation") {
  Explanation e;
  e.event_id = "E1";
  e.exact = {rep("c1", {"S1"}, 0.1, 0.3)};
  KnowledgeSet ks(1, {e});

  CHECK(is_explicable(feature("c1", {"S1"}, 5.0, 6.0), ks));  // no distance test
  CHECK_FALSE(is_explicable(feature("c9", {"S9"}, 0.1, 0.2), ks));
  CHECK_FALSE(is_explicable(feature("c1", {"S2"}, 0.1, 0.2), ks));
}

TEST_CASE("build_cover_map partitions features and links both directions") {
  Explanation e1;
  e1.event_id = "E1";
  e1.exact = {rep("c1", {"S1"}, 0.1, 0.3)};
  e1.possible = {{rep("c2", {"S2"}, 0.0, 0.4), 0.5, 0, 0}};
  Explanation e2;
  e2.event_id = "E2";
  e2.exact = {rep("c2", {"S2"}, 0.1, 0.4)};
  KnowledgeSet ks(1, {e1, e2});

  std::vector<ViolationFeature> features = {
      feature("c1", {"S1"}, 0.1, 0.3),   // covered by E1
      feature("c2", {"S2"}, 0.1, 0.4),   // covered by E1 and E2
      feature("c9", {"S9"}, 0.1, 0.2),   // inexplicable (Set C)
  };
  MatchConfig cfg;
  auto cm = build_cover_map(features, ks, cfg);

  CHECK(cm.explicable == std::vector<std::size_t>{0, 1});
  CHECK(cm.inexplicable == std::vector<std::size_t>{2});

  // Bidirectional: v in R.cover iff R in CoverAE(v).
  for (const auto& [event, cover] : cm.cover) {
    for (std::size_t f : cover) {
      bool found = false;
      for (const auto& id : cm.cover_ae[f]) found = found || id == event;
      CHECK(found);
    }
  }
  CHECK(cm.cover.at("E1") == std::vector<std::size_t>{0, 1});
  CHECK(cm.cover.at("E2") == std::vector<std::size_t>{1});

  // Partition: explicable and Set C are disjoint and exhaustive.
  CHECK(cm.explicable.size() + cm.inexplicable.size() == features.size());
}

TEST_CASE("set B lists representations nothing fired for") {
  Explanation e;
  e.event_id = "E1";
  e.exact = {rep("c1", {"S1"}, 0.1, 0.3)};
  e.possible = {{rep("c7", {"S7"}, 0.1, 0.2), 0.5, 0, 0}};
  KnowledgeSet ks(1, {e});
  std::vector<ViolationFeature> features = {feature("c1", {"S1"}, 0.1, 0.3)};
  auto cm = build_cover_map(features, ks, MatchConfig{});
  REQUIRE(cm.unmatched_knowledge.size() == 1);
  CHECK(cm.unmatched_knowledge[0].event_id == "E1");
  CHECK(cm.unmatched_knowledge[0].constraint_id == "c7");
}

TEST_CASE("raising theta never shrinks a cover") {
  Explanation e;
  e.event_id = "E1";
  e.exact = {rep("c1", {"S1"}, 0.2, 0.6)};
  KnowledgeSet ks(1, {e});
  std::vector<ViolationFeature> features = {feature("c1", {"S1"}, 0.1, 0.3)};

  MatchConfig low;
  low.theta = 0.5;
  MatchConfig high;
  high.theta = 0.95;
  auto cm_low = build_cover_map(features, ks, low);
  auto cm_high = build_cover_map(features, ks, high);
  const std::size_t low_n =
      cm_low.cover.count("E1") ? cm_low.cover.at("E1").size() : 0;
  const std::size_t high_n =
      cm_high.cover.count("E1") ? cm_high.cover.at("E1").size() : 0;
  CHECK(high_n >= low_n);
  CHECK(high_n == 1);  // dist 0.8 < 0.95
  CHECK(low_n == 0);
}

TEST_CASE("split-mode features match their multi-sequence representation") {
  Representation r = rep("m1", {"S1", "S2"}, 0.1, 0.3);
  ViolationFeature split = feature("m1", {"S1"}, 0.1, 0.3);
  CHECK(signature_matches(split, r));
  ViolationFeature other = feature("m1", {"S3"}, 0.1, 0.3);
  CHECK_FALSE(signature_matches(other, r));
  // A joint feature must match the full set.
  ViolationFeature joint = feature("m1", {"S1", "S2"}, 0.1, 0.3);
  CHECK(signature_matches(joint, r));
}
