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

#ifndef AEXPLAIN_EXPLAIN_HPP_
#define AEXPLAIN_EXPLAIN_HPP_

#include <string>
#include <vector>

#include "aexplain/matching.hpp"

namespace aexplain {

// An explanation whose exact representations all have a detected counterpart
// (distance < 1), with its cover inside V* and its cost.
struct Candidate {
  std::string event_id;
  std::string label;
  std::vector<std::size_t> cover;  // sorted feature indices, subset of V*
  double cost = 0.0;
};

struct ChosenEvent {
  std::string event_id;
  std::string label;
  double cost = 0.0;
  std::vector<std::size_t> covered;
};

struct Solution {
  std::vector<ChosenEvent> chosen;     // selection order, no duplicates
  std::vector<std::size_t> uncovered;  // V* residue; empty on full cover
  double total_cost = 0.0;

  bool contains(const std::string& event_id) const;
};

// Cost of applying an event: exact distances plus weight-scaled possible
// distances, each divided by the representation's sequence count. A possible
// representation with no matching detected feature contributes distance 1.
// Throws NotACandidate when some exact representation has no feature with
// distance < 1.
double explanation_cost(const Explanation& event,
                        const std::vector<ViolationFeature>& features,
                        const MatchConfig& cfg);

// All candidate explanations, ordered by event id.
std::vector<Candidate> candidate_explanations(
    const std::vector<ViolationFeature>& features, const CoverMap& cover_map,
    const KnowledgeSet& ks, const MatchConfig& cfg);

struct PruneForceResult {
  std::vector<Candidate> remaining;            // survivors, forced removed
  std::vector<Candidate> forced;               // unique coverers, by event id
  std::vector<std::size_t> reduced_universe;   // universe minus forced covers
  std::vector<std::string> pruned_ids;
};

// Global optimization step: drops every candidate strictly dominated by a
// cheaper candidate with a superset cover, then forces every candidate that
// is the only coverer of some feature.
PruneForceResult prune_and_force(const std::vector<Candidate>& candidates,
                                 const std::vector<std::size_t>& universe);

// The three-phase covering heuristic: prune/force, then cover multi-sequence
// features in descending involvement picking the cheapest coverer, then cover
// the residue by best gain/cost ratio. Features nothing covers are returned
// as the uncovered residue of a partial solution.
Solution solve_aec(const std::vector<Candidate>& candidates,
                   const std::vector<std::size_t>& universe,
                   const std::vector<ViolationFeature>& features);

// Exhaustive minimum-cost cover for oracle checks; candidate count is capped
// at 20. Ties break toward the lexicographically smallest event-id list.
// Throws Infeasible when no subset covers the universe.
Solution brute_force_cover(const std::vector<Candidate>& candidates,
                           const std::vector<std::size_t>& universe);

// Every optimal selection (as sorted event-id lists), for invariant checks.
std::vector<std::vector<std::string>> brute_force_optima(
    const std::vector<Candidate>& candidates,
    const std::vector<std::size_t>& universe);

struct BaselineContext {
  std::size_t knowledge_events = 0;      // |R|
  std::size_t total_constraints = 0;     // |C|
  std::size_t violated_constraints = 0;  // |C_vio|
  double lambda = 0.4;
};

// Runs one of AEC, greedyC, greedynC, MFnC, TopK, AE on prepared inputs.
// greedynC and MFnC differ from greedyC/AEC only upstream (split detection),
// so here they share those engines.
Solution run_baseline(const std::string& name,
                      const std::vector<Candidate>& candidates,
                      const std::vector<std::size_t>& universe,
                      const std::vector<ViolationFeature>& features,
                      const BaselineContext& ctx);

struct ExplainConfig {
  MatchConfig match;
  double lambda = 0.4;
  std::string method = "AEC";
  bool split_detection = false;  // recorded in the report
};

struct ExplainResult {
  std::vector<ViolationFeature> features;
  CoverMap cover_map;
  std::vector<Candidate> candidates;
  Solution solution;
  std::size_t violated_constraints = 0;
};

// detect-output -> cover map -> candidates -> solution, with the method's
// engine selected by cfg.method.
ExplainResult explain_features(const std::vector<ViolationFeature>& features,
                               const KnowledgeSet& ks,
                               const ConstraintCatalog& catalog,
                               const ExplainConfig& cfg);

std::string explanation_report_json(const ExplainResult& result,
                                    const ExplainConfig& cfg, int indent = 2);

}  // namespace aexplain

#endif  // AEXPLAIN_EXPLAIN_HPP_
