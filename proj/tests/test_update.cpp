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

#include "aexplain/update.hpp"

#include <doctest.h>

#include <random>
#include <set>

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

Representation rep(const std::string& cid, std::vector<std::string> seqs,
                   double lo, double hi) {
  Representation r;
  r.constraint_id = cid;
  r.sequences = std::move(seqs);
  std::sort(r.sequences.begin(), r.sequences.end());
  r.degree = Degree::interval(lo, hi);
  return r;
}

ConstraintCatalog small_catalog() {
  return parse_catalog_json(R"([
    {"id":"c1","ctype":"T1","kind":"quantitative","domain":["S1"],
     "check":{"variant":"value_domain","lo":0,"hi":1}},
    {"id":"c2","ctype":"T1","kind":"quantitative","domain":["S1"],
     "check":{"variant":"value_domain","lo":0,"hi":1}},
    {"id":"c3","ctype":"T1","kind":"quantitative","domain":["S1"],
     "check":{"variant":"value_domain","lo":0,"hi":1}},
    {"id":"cm","ctype":"T2","kind":"quantitative","domain":["S1","S2"],
     "check":{"variant":"mechanism","coeffs":[1,-1],"tolerance":1}},
    {"id":"c9","ctype":"T1","kind":"quantitative","domain":["S9"],
     "check":{"variant":"value_domain","lo":0,"hi":1}}
  ])");
}

}  // namespace

TEST_CASE("relevance edges follow the two definition cases") {
  auto catalog = small_catalog();
  std::vector<ViolationFeature> features = {
      feature("c1", {"S1"}, 0.1, 0.2),  // 0
      feature("c2", {"S1"}, 0.1, 0.2),  // 1: same sequence, different constraint
      feature("cm", {"S1"}, 0.1, 0.2),  // 2: split feature of a multi-seq rule
      feature("cm", {"S2"}, 0.1, 0.2),  // 3: same rule, different sequence
      feature("c9", {"S9"}, 0.1, 0.2),  // 4: unrelated to everything
  };
  auto g = build_relevance_graph(features, catalog);
  auto has_edge = [&](std::size_t a, std::size_t b) {
    return std::find(g.neighbours[a].begin(), g.neighbours[a].end(), b) !=
           g.neighbours[a].end();
  };
  CHECK(has_edge(0, 1));       // case 1
  CHECK(has_edge(2, 3));       // case 2
  CHECK_FALSE(has_edge(0, 4)); // neither
  CHECK_FALSE(has_edge(1, 4));
  // Symmetry and irreflexivity.
  for (std::size_t i = 0; i < features.size(); ++i) {
    CHECK_FALSE(has_edge(i, i));
    for (std::size_t j : g.neighbours[i]) CHECK(has_edge(j, i));
  }
}

TEST_CASE("find_up returns CoverAE for covered seeds and explores otherwise") {
  auto catalog = small_catalog();
  // Chain va(c1,S1) - vb(c2,S1) - vc(c3,S1); only vc is covered, by R2.
  std::vector<ViolationFeature> features = {
      feature("c1", {"S1"}, 0.1, 0.2),
      feature("c2", {"S1"}, 0.1, 0.2),
      feature("c3", {"S1"}, 0.1, 0.2),
  };
  auto graph = build_relevance_graph(features, catalog);
  std::vector<std::vector<std::string>> cover_ae = {{}, {}, {"R2"}};

  SUBCASE("covered seed short-circuits") {
    std::vector<bool> visited(3, false);
    auto res = find_up(2, graph, cover_ae, visited);
    CHECK(res.candr.empty());
    CHECK(res.upset == std::vector<std::string>{"R2"});
    CHECK(visited[2]);
  }
  SUBCASE("chain accumulates uncovered features and the boundary's events") {
    std::vector<bool> visited(3, false);
    auto res = find_up(0, graph, cover_ae, visited);
    CHECK(res.candr == std::vector<std::size_t>{0, 1});
    CHECK(res.upset == std::vector<std::string>{"R2"});
  }
  SUBCASE("isolated uncovered feature keeps an empty upset") {
    std::vector<ViolationFeature> lone = {feature("c9", {"S9"}, 0.1, 0.2)};
    auto g1 = build_relevance_graph(lone, catalog);
    std::vector<std::vector<std::string>> no_cover = {{}};
    std::vector<bool> visited(1, false);
    auto res = find_up(0, g1, no_cover, visited);
    CHECK(res.candr == std::vector<std::size_t>{0});
    CHECK(res.upset.empty());
  }
}

TEST_CASE("explanation_update inserts learnt possibles into covering events") {
  auto catalog = small_catalog();
  Explanation r1;
  r1.event_id = "R1";
  r1.exact = {rep("c2", {"S1"}, 0.1, 0.2)};
  KnowledgeSet ks(1, {r1});

  std::vector<ViolationFeature> features = {
      feature("c1", {"S1"}, 0.3, 0.4),  // uncovered: nothing mentions c1
      feature("c2", {"S1"}, 0.1, 0.2),  // covered by R1 exactly
  };
  UpdateConfig cfg;
  cfg.auto_accept = true;

  auto res = explanation_update(ks, features, {0}, catalog, cfg);
  REQUIRE(res.applied);
  REQUIRE(res.proposals.size() == 1);
  CHECK(res.proposals[0].target_event == "R1");
  CHECK_FALSE(res.proposals[0].creates_event);
  const Explanation* updated = res.knowledge.find("R1");
  REQUIRE(updated != nullptr);
  REQUIRE(updated->possible.size() == 1);
  CHECK(updated->possible[0].rep.constraint_id == "c1");
  CHECK(updated->possible[0].weight == 0.5);
  CHECK(res.knowledge.version() == 2);

  SUBCASE("a second run with the updated knowledge changes nothing") {
    auto again = explanation_update(res.knowledge, features, {0}, catalog, cfg);
    CHECK(again.proposals.empty());
    CHECK_FALSE(again.applied);
    CHECK(again.knowledge == res.knowledge);
  }
}

TEST_CASE("an unexplainable component becomes a new event") {
  auto catalog = small_catalog();
  Explanation far;
  far.event_id = "R1";
  far.exact = {rep("c9", {"S9"}, 0.5, 0.6)};  // unrelated corner
  KnowledgeSet ks(1, {far});

  // Two related features (same sequence), no coverage anywhere.
  std::vector<ViolationFeature> features = {
      feature("c1", {"S1"}, 0.3, 0.4),
      feature("c2", {"S1"}, 0.2, 0.5),
  };
  UpdateConfig cfg;
  cfg.auto_accept = true;
  auto res = explanation_update(ks, features, {0, 1}, catalog, cfg);
  REQUIRE(res.proposals.size() == 1);
  const UpdateProposal& p = res.proposals[0];
  CHECK(p.creates_event);
  CHECK(p.target_event.rfind("auto-", 0) == 0);
  REQUIRE(p.new_reps.size() == 2);

  const Explanation* created = res.knowledge.find(p.target_event);
  REQUIRE(created != nullptr);
  // Seed feature is the exact representation, the related one is possible.
  REQUIRE(created->exact.size() == 1);
  CHECK(created->exact[0].constraint_id == "c1");
  REQUIRE(created->possible.size() == 1);
  CHECK(created->possible[0].rep.constraint_id == "c2");

  SUBCASE("the auto id is deterministic") {
    auto res2 = explanation_update(ks, features, {0, 1}, catalog, cfg);
    CHECK(res2.proposals[0].target_event == p.target_event);
  }
  SUBCASE("empty uncovered set changes nothing") {
    auto res3 = explanation_update(ks, features, {}, catalog, cfg);
    CHECK(res3.proposals.empty());
    CHECK(res3.knowledge == ks);
  }
}

TEST_CASE("proposals round-trip and only accepted ones apply") {
  auto catalog = small_catalog();
  Explanation r1;
  r1.event_id = "R1";
  r1.exact = {rep("c2", {"S1"}, 0.1, 0.2)};
  KnowledgeSet ks(1, {r1});
  std::vector<ViolationFeature> features = {
      feature("c1", {"S1"}, 0.3, 0.4),
      feature("c2", {"S1"}, 0.1, 0.2),
  };
  UpdateConfig cfg;  // no auto-accept
  auto res = explanation_update(ks, features, {0}, catalog, cfg);
  CHECK_FALSE(res.applied);
  CHECK(res.knowledge == ks);
  REQUIRE(res.proposals.size() == 1);

  auto reparsed = proposals_from_json(proposals_to_json(res.proposals));
  REQUIRE(reparsed.size() == 1);
  CHECK(reparsed[0].target_event == res.proposals[0].target_event);
  CHECK(reparsed[0].status == ProposalStatus::kPending);

  SUBCASE("pending proposals do not apply") {
    auto unchanged = apply_proposals(ks, reparsed);
    CHECK(unchanged == ks);
  }
  SUBCASE("accepted proposals apply once") {
    reparsed[0].status = ProposalStatus::kAccepted;
    auto updated = apply_proposals(ks, reparsed);
    CHECK(updated.find("R1")->possible.size() == 1);
    CHECK(updated.version() == 2);
  }
}

TEST_CASE("degree refinement averages overlapping intervals") {
  MatchConfig cfg;
  cfg.clamp = {-100.0, 100.0};
  Representation r = rep("c1", {"S1"}, 10.0, 20.0);

  SUBCASE("k=1 with observation [14,24] gives [12,22]") {
    auto out = modify_degree_function(r, Degree::interval(14.0, 24.0), 1, cfg);
    CHECK_FALSE(out.manual_review);
    CHECK(out.degree.lo == doctest::Approx(12.0));
    CHECK(out.degree.hi == doctest::Approx(22.0));
    CHECK(out.update_count == 2);
  }
  SUBCASE("an identical observation is a fixed point that bumps k") {
    auto out = modify_degree_function(r, Degree::interval(10.0, 20.0), 3, cfg);
    CHECK_FALSE(out.manual_review);
    CHECK(out.degree == Degree::interval(10.0, 20.0));
    CHECK(out.update_count == 4);
  }
  SUBCASE("a disjoint observation goes to manual review") {
    auto out = modify_degree_function(r, Degree::interval(30.0, 40.0), 1, cfg);
    CHECK(out.manual_review);
    CHECK(out.degree == r.degree);
    CHECK(out.update_count == 1);
  }
  SUBCASE("qualitative representations are a kind mismatch") {
    Representation q;
    q.constraint_id = "c1";
    q.sequences = {"S1"};
    q.degree = Degree::boolean();
    CHECK_THROWS_AS(modify_degree_function(q, Degree::interval(0, 1), 1, cfg),
                    Error);
  }
}

TEST_CASE("weight re-estimation uses the conditional probability") {
  Explanation e;
  e.event_id = "E1";
  e.exact = {rep("c1", {"S1"}, 0.1, 0.3)};
  e.possible = {{rep("c2", {"S1"}, 0.1, 0.3), 0.5, 0, 0}};
  KnowledgeSet ks(1, {e});

  Solution with_e1;
  with_e1.chosen = {{"E1", "", 0.0, {}}};
  std::vector<SolutionRecord> history;
  // 10 appearances, 4 of them with a consistent c2 feature.
  for (int i = 0; i < 10; ++i) {
    SolutionRecord rec;
    rec.solution = with_e1;
    if (i < 4) rec.features = {feature("c2", {"S1"}, 0.1, 0.3)};
    history.push_back(std::move(rec));
  }
  MatchConfig cfg;
  auto updated = reestimate_weights(ks, history, cfg);
  CHECK(updated.find("E1")->possible[0].weight == doctest::Approx(0.4));
  CHECK(updated.find("E1")->n_pos == 10);
  CHECK(updated.version() == 2);

  SUBCASE("a ratio of one clamps inside (0,1)") {
    KnowledgeSet ks2(1, {e});
    std::vector<SolutionRecord> all_hits;
    for (int i = 0; i < 5; ++i) {
      SolutionRecord rec;
      rec.solution = with_e1;
      rec.features = {feature("c2", {"S1"}, 0.1, 0.3)};
      all_hits.push_back(std::move(rec));
    }
    auto u2 = reestimate_weights(ks2, all_hits, cfg);
    CHECK(u2.find("E1")->possible[0].weight == doctest::Approx(0.999));
  }
  SUBCASE("events never chosen keep their weights") {
    KnowledgeSet ks3(1, {e});
    Solution other;
    other.chosen = {{"EX", "", 0.0, {}}};
    std::vector<SolutionRecord> none = {{other, {}}};
    auto u3 = reestimate_weights(ks3, none, cfg);
    CHECK(u3.find("E1")->possible[0].weight == 0.5);
  }
}

TEST_CASE("random update cycles preserve the explanation invariants") {
  auto catalog = small_catalog();
  Explanation base;
  base.event_id = "R1";
  base.exact = {rep("c2", {"S1"}, 0.1, 0.2)};
  KnowledgeSet ks(1, {base});

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> band(0.0, 0.8);
  const std::vector<std::string> cids = {"c1", "c2", "c3", "c9"};
  for (int cycle = 0; cycle < 50; ++cycle) {
    std::vector<ViolationFeature> features;
    for (std::size_t i = 0; i < 1 + rng() % 4; ++i) {
      const std::string cid = cids[rng() % cids.size()];
      const double lo = band(rng);
      features.push_back(
          feature(cid, {cid == "c9" ? "S9" : "S1"}, lo, lo + band(rng) * 0.4));
    }
    std::vector<std::size_t> uncovered;
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (rng() % 2 == 0) uncovered.push_back(i);
    }
    UpdateConfig cfg;
    cfg.auto_accept = true;
    auto res = explanation_update(ks, features, uncovered, catalog, cfg);
    ks = res.knowledge;
    for (const Explanation& e : ks.events()) {
      CHECK_FALSE(e.exact.empty());
      for (const PossibleRep& p : e.possible) {
        CHECK(p.weight > 0.0);
        CHECK(p.weight < 1.0);
        for (const Representation& x : e.exact) {
          CHECK_FALSE(same_signature(x, p.rep));
        }
      }
    }
  }
}
