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

#ifndef AEXPLAIN_UPDATE_HPP_
#define AEXPLAIN_UPDATE_HPP_

#include <string>
#include <vector>

#include "aexplain/explain.hpp"
#include "aexplain/matching.hpp"

namespace aexplain {

// Features as vertices; an edge joins two features that share a sequence
// under different constraints, or fall under the same multi-sequence
// constraint on different sequences. Symmetric, irreflexive, not transitive.
struct RelevanceGraph {
  std::vector<std::vector<std::size_t>> neighbours;  // sorted adjacency

  std::size_t size() const { return neighbours.size(); }
};

RelevanceGraph build_relevance_graph(const std::vector<ViolationFeature>& features,
                                     const ConstraintCatalog& catalog);

struct FindUpResult {
  std::vector<std::size_t> candr;   // uncovered features reachable from seed
  std::vector<std::string> upset;   // explanations to update
};

// Depth-first walk from an uncovered feature: covered features contribute
// their CoverAE and stop the walk; uncovered ones join Candr and expand.
// Marks every touched feature in `visited`.
FindUpResult find_up(std::size_t seed, const RelevanceGraph& graph,
                     const std::vector<std::vector<std::string>>& cover_ae,
                     std::vector<bool>& visited);

enum class ProposalStatus { kPending, kAccepted, kRejected };

struct UpdateProposal {
  std::string id;
  std::string target_event;  // existing event id, or the new event's id
  bool creates_event = false;
  std::string label;
  // For a new event the first representation is the exact seed.
  std::vector<Representation> new_reps;
  std::vector<std::string> provenance_candr;  // feature descriptions
  std::vector<std::string> provenance_upset;
  ProposalStatus status = ProposalStatus::kPending;
};

struct UpdateConfig {
  MatchConfig match;
  double initial_weight = 0.5;  // w0 for learnt possible representations
  bool auto_accept = false;
};

struct UpdateResult {
  KnowledgeSet knowledge;  // updated when auto_accept, else the input set
  std::vector<UpdateProposal> proposals;
  bool applied = false;
};

// Explanation update over the uncovered features: relates them through the
// relevance graph, inserts them as possible representations into every
// explanation FindUp surfaces, or creates a new event (seed feature exact,
// related features possible) when none exists. Re-running on unchanged
// inputs proposes nothing.
UpdateResult explanation_update(const KnowledgeSet& ks,
                                const std::vector<ViolationFeature>& features,
                                const std::vector<std::size_t>& uncovered,
                                const ConstraintCatalog& catalog,
                                const UpdateConfig& cfg);

// Applies accepted proposals to the knowledge set; one version bump when
// anything changed.
KnowledgeSet apply_proposals(const KnowledgeSet& ks,
                             const std::vector<UpdateProposal>& proposals);
KnowledgeSet apply_proposals_with_weight(
    const KnowledgeSet& ks, const std::vector<UpdateProposal>& proposals,
    double initial_weight);

std::string proposals_to_json(const std::vector<UpdateProposal>& proposals,
                              int indent = 2);
std::vector<UpdateProposal> proposals_from_json(const std::string& json_text);

struct DegreeUpdate {
  bool manual_review = false;
  Degree degree;                 // refined interval when accepted
  std::uint64_t update_count = 0;  // incremented k
};

// Degree-refinement rule: running average with the observed interval when the
// two intervals still overlap, manual review when they are disjoint. Throws
// KindMismatch for qualitative representations.
DegreeUpdate modify_degree_function(const Representation& rep,
                                    const Degree& observed, std::uint64_t k,
                                    const MatchConfig& cfg);

struct SolutionRecord {
  Solution solution;
  std::vector<ViolationFeature> features;
};

// Counts event appearances in solutions and possible-representation
// co-occurrences with consistent features (persisted in the knowledge set).
void accumulate_solution_counts(KnowledgeSet& ks, const Solution& solution,
                                const std::vector<ViolationFeature>& features,
                                const MatchConfig& cfg);

// Conditional-probability re-estimation of possible-representation weights
// from the accumulated counters; representations whose event never appeared
// keep their weight. Estimates are clamped into (0,1) by epsilon.
KnowledgeSet reestimate_weights(const KnowledgeSet& ks,
                                const std::vector<SolutionRecord>& history,
                                const MatchConfig& cfg,
                                double epsilon = 1e-3);

}  // namespace aexplain

#endif  // AEXPLAIN_UPDATE_HPP_
