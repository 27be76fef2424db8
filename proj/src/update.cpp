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

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "aexplain/errors.hpp"

namespace aexplain {

using nlohmann::json;

namespace {

bool sequences_intersect(const std::vector<std::string>& a,
                         const std::vector<std::string>& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia == *ib) return true;
    if (*ia < *ib) ++ia;
    else ++ib;
  }
  return false;
}

std::string feature_signature(const ViolationFeature& f) {
  std::string sig = f.constraint_id;
  for (const std::string& s : f.sequences) {
    sig += '|';
    sig += s;
  }
  return sig;
}

Representation rep_from_feature(const ViolationFeature& f) {
  Representation r;
  r.constraint_id = f.constraint_id;
  r.sequences = f.sequences;
  r.degree = f.degree;
  return r;
}

bool event_has_signature(const Explanation& e, const Representation& r) {
  for (const Representation& x : e.exact) {
    if (same_signature(x, r)) return true;
  }
  for (const PossibleRep& p : e.possible) {
    if (same_signature(p.rep, r)) return true;
  }
  return false;
}

// FNV-1a over the sorted feature signatures; stable across runs so the same
// uncovered component always proposes the same event id.
std::string component_hash(const std::vector<std::string>& signatures) {
  std::uint64_t h = 1469598103934665603ull;
  for (const std::string& sig : signatures) {
    for (unsigned char c : sig) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= '\n';
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

const char* status_name(ProposalStatus s) {
  switch (s) {
    case ProposalStatus::kPending: return "pending";
    case ProposalStatus::kAccepted: return "accepted";
    case ProposalStatus::kRejected: return "rejected";
  }
  return "pending";
}

ProposalStatus status_from(const std::string& s) {
  if (s == "accepted") return ProposalStatus::kAccepted;
  if (s == "rejected") return ProposalStatus::kRejected;
  return ProposalStatus::kPending;
}

json rep_to_json(const Representation& r) {
  json deg;
  if (r.degree.quantitative) {
    deg = {r.degree.lo, r.degree.hi};
  } else {
    deg = true;
  }
  return {{"constraint_id", r.constraint_id},
          {"sequences", r.sequences},
          {"F_r", deg}};
}

Representation rep_from_json(const json& item) {
  Representation r;
  r.constraint_id = item.at("constraint_id").get<std::string>();
  r.sequences = item.at("sequences").get<std::vector<std::string>>();
  std::sort(r.sequences.begin(), r.sequences.end());
  const json& deg = item.at("F_r");
  if (deg.is_boolean()) {
    r.degree = Degree::boolean();
  } else {
    r.degree = Degree::interval(deg.at(0).get<double>(), deg.at(1).get<double>());
  }
  return r;
}

}  // namespace

RelevanceGraph build_relevance_graph(const std::vector<ViolationFeature>& features,
                                     const ConstraintCatalog& catalog) {
  RelevanceGraph g;
  g.neighbours.resize(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    for (std::size_t j = i + 1; j < features.size(); ++j) {
      const ViolationFeature& a = features[i];
      const ViolationFeature& b = features[j];
      bool related = false;
      if (a.constraint_id != b.constraint_id) {
        related = sequences_intersect(a.sequences, b.sequences);
      } else if (a.sequences != b.sequences) {
        const Constraint* c = catalog.find(a.constraint_id);
        related = c != nullptr && c->multi_sequence();
      }
      if (related) {
        g.neighbours[i].push_back(j);
        g.neighbours[j].push_back(i);
      }
    }
  }
  return g;
}

FindUpResult find_up(std::size_t seed, const RelevanceGraph& graph,
                     const std::vector<std::vector<std::string>>& cover_ae,
                     std::vector<bool>& visited) {
  FindUpResult res;
  std::set<std::string> upset;
  visited[seed] = true;
  if (!cover_ae[seed].empty()) {
    res.upset.assign(cover_ae[seed].begin(), cover_ae[seed].end());
    return res;
  }
  std::vector<std::size_t> stack = {seed};
  std::set<std::size_t> candr = {seed};
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t n : graph.neighbours[u]) {
      if (visited[n]) continue;
      visited[n] = true;
      if (!cover_ae[n].empty()) {
        upset.insert(cover_ae[n].begin(), cover_ae[n].end());
      } else {
        candr.insert(n);
        stack.push_back(n);
      }
    }
  }
  res.candr.assign(candr.begin(), candr.end());
  res.upset.assign(upset.begin(), upset.end());
  return res;
}

UpdateResult explanation_update(const KnowledgeSet& ks,
                                const std::vector<ViolationFeature>& features,
                                const std::vector<std::size_t>& uncovered,
                                const ConstraintCatalog& catalog,
                                const UpdateConfig& cfg) {
  UpdateResult result;
  result.knowledge = ks;
  if (uncovered.empty()) return result;

  const RelevanceGraph graph = build_relevance_graph(features, catalog);
  CoverMap cm = build_cover_map(features, ks, cfg.match);
  std::vector<std::vector<std::string>> cover_ae = cm.cover_ae;
  std::vector<bool> visited(features.size(), false);

  std::vector<std::size_t> order = uncovered;
  std::sort(order.begin(), order.end());

  std::size_t next_proposal = 0;
  for (std::size_t seed : order) {
    if (visited[seed]) continue;
    FindUpResult fu = find_up(seed, graph, cover_ae, visited);
    if (fu.candr.empty()) continue;  // seed was already covered

    // Seed first so the new-event rule can take it as the exact rep.
    std::vector<std::size_t> candr = fu.candr;
    auto seed_it = std::find(candr.begin(), candr.end(), seed);
    if (seed_it != candr.end()) std::iter_swap(candr.begin(), seed_it);

    std::vector<std::string> upset = fu.upset;
    if (upset.empty()) {
      std::vector<std::string> sigs;
      for (std::size_t f : fu.candr) sigs.push_back(feature_signature(features[f]));
      std::sort(sigs.begin(), sigs.end());
      const std::string event_id = "auto-" + component_hash(sigs);
      if (result.knowledge.find(event_id) == nullptr) {
        UpdateProposal p;
        p.id = "p" + std::to_string(next_proposal++);
        p.target_event = event_id;
        p.creates_event = true;
        p.label = "learnt event (" + std::to_string(candr.size()) + " features)";
        for (std::size_t f : candr) p.new_reps.push_back(rep_from_feature(features[f]));
        for (std::size_t f : candr) {
          p.provenance_candr.push_back(feature_signature(features[f]));
        }
        result.proposals.push_back(std::move(p));
      }
      upset = {event_id};
    } else {
      for (const std::string& event_id : upset) {
        const Explanation* target = result.knowledge.find(event_id);
        if (target == nullptr) continue;
        UpdateProposal p;
        p.id = "p" + std::to_string(next_proposal);
        p.target_event = event_id;
        p.creates_event = false;
        for (std::size_t f : candr) {
          Representation r = rep_from_feature(features[f]);
          if (!event_has_signature(*target, r)) p.new_reps.push_back(std::move(r));
        }
        if (p.new_reps.empty()) continue;
        ++next_proposal;
        for (std::size_t f : candr) {
          p.provenance_candr.push_back(feature_signature(features[f]));
        }
        p.provenance_upset = upset;
        result.proposals.push_back(std::move(p));
      }
    }
    // The component now counts as covered by the updated explanations.
    for (std::size_t f : candr) cover_ae[f] = upset;
  }

  if (cfg.auto_accept && !result.proposals.empty()) {
    for (UpdateProposal& p : result.proposals) p.status = ProposalStatus::kAccepted;
    result.knowledge = apply_proposals_with_weight(result.knowledge,
                                                   result.proposals,
                                                   cfg.initial_weight);
    result.applied = true;
  }
  return result;
}

KnowledgeSet apply_proposals_with_weight(
    const KnowledgeSet& ks, const std::vector<UpdateProposal>& proposals,
    double initial_weight) {
  KnowledgeSet out = ks;
  bool changed = false;
  for (const UpdateProposal& p : proposals) {
    if (p.status != ProposalStatus::kAccepted) continue;
    if (p.creates_event) {
      if (out.find(p.target_event) != nullptr || p.new_reps.empty()) continue;
      Explanation e;
      e.event_id = p.target_event;
      e.label = p.label;
      e.exact.push_back(p.new_reps.front());
      for (std::size_t i = 1; i < p.new_reps.size(); ++i) {
        bool dup = false;
        for (const Representation& prev : e.exact) {
          dup = dup || same_signature(prev, p.new_reps[i]);
        }
        for (const PossibleRep& prev : e.possible) {
          dup = dup || same_signature(prev.rep, p.new_reps[i]);
        }
        if (!dup) e.possible.push_back({p.new_reps[i], initial_weight, 0, 0});
      }
      out.add_event(std::move(e));
      changed = true;
    } else {
      for (Explanation& e : out.mutable_events()) {
        if (e.event_id != p.target_event) continue;
        for (const Representation& r : p.new_reps) {
          if (event_has_signature(e, r)) continue;
          e.possible.push_back({r, initial_weight, 0, 0});
          changed = true;
        }
      }
    }
  }
  if (changed) out.bump_version();
  return out;
}

KnowledgeSet apply_proposals(const KnowledgeSet& ks,
                             const std::vector<UpdateProposal>& proposals) {
  return apply_proposals_with_weight(ks, proposals, 0.5);
}

std::string proposals_to_json(const std::vector<UpdateProposal>& proposals,
                              int indent) {
  json doc = json::array();
  for (const UpdateProposal& p : proposals) {
    json reps = json::array();
    for (const Representation& r : p.new_reps) reps.push_back(rep_to_json(r));
    doc.push_back({{"id", p.id},
                   {"target_event", p.target_event},
                   {"creates_event", p.creates_event},
                   {"label", p.label},
                   {"new_reps", std::move(reps)},
                   {"provenance",
                    {{"candr", p.provenance_candr}, {"upset", p.provenance_upset}}},
                   {"status", status_name(p.status)}});
  }
  return doc.dump(indent);
}

std::vector<UpdateProposal> proposals_from_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchemaError, std::string("proposal file: ") + e.what());
  }
  std::vector<UpdateProposal> out;
  try {
    for (const json& item : doc) {
      UpdateProposal p;
      p.id = item.at("id").get<std::string>();
      p.target_event = item.at("target_event").get<std::string>();
      p.creates_event = item.value("creates_event", false);
      p.label = item.value("label", std::string{});
      for (const json& r : item.at("new_reps")) p.new_reps.push_back(rep_from_json(r));
      if (item.contains("provenance")) {
        p.provenance_candr = item.at("provenance")
                                 .value("candr", std::vector<std::string>{});
        p.provenance_upset = item.at("provenance")
                                 .value("upset", std::vector<std::string>{});
      }
      p.status = status_from(item.value("status", std::string{"pending"}));
      out.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchemaError,
                std::string("proposal entry: ") + e.what());
  }
  return out;
}

DegreeUpdate modify_degree_function(const Representation& rep,
                                    const Degree& observed, std::uint64_t k,
                                    const MatchConfig& cfg) {
  if (!rep.degree.quantitative || !observed.quantitative) {
    throw Error(ErrorKind::kKindMismatch,
                "degree refinement applies to quantitative representations only");
  }
  const double dist = interval_distance(observed.lo, observed.hi, rep.degree.lo,
                                        rep.degree.hi, cfg.clamp);
  DegreeUpdate out;
  if (dist >= 1.0) {
    out.manual_review = true;
    out.degree = rep.degree;
    out.update_count = k;
    return out;
  }
  const double dk = static_cast<double>(k);
  out.degree = Degree::interval((dk * rep.degree.lo + observed.lo) / (dk + 1.0),
                                (dk * rep.degree.hi + observed.hi) / (dk + 1.0));
  out.update_count = k + 1;
  return out;
}

void accumulate_solution_counts(KnowledgeSet& ks, const Solution& solution,
                                const std::vector<ViolationFeature>& features,
                                const MatchConfig& cfg) {
  for (Explanation& e : ks.mutable_events()) {
    if (!solution.contains(e.event_id)) continue;
    e.n_pos += 1;
    for (PossibleRep& p : e.possible) {
      for (const ViolationFeature& v : features) {
        if (signature_matches(v, p.rep) && is_consistent(v, p.rep, cfg)) {
          p.n_pos += 1;
          break;
        }
      }
    }
  }
}

KnowledgeSet reestimate_weights(const KnowledgeSet& ks,
                                const std::vector<SolutionRecord>& history,
                                const MatchConfig& cfg, double epsilon) {
  KnowledgeSet out = ks;
  for (const SolutionRecord& rec : history) {
    accumulate_solution_counts(out, rec.solution, rec.features, cfg);
  }
  bool changed = !history.empty();
  for (Explanation& e : out.mutable_events()) {
    if (e.n_pos == 0) continue;  // never appeared in a solution
    for (PossibleRep& p : e.possible) {
      const double estimate =
          static_cast<double>(p.n_pos) / static_cast<double>(e.n_pos);
      const double w =
          std::min(1.0 - epsilon, std::max(epsilon, estimate));
      if (w != p.weight) {
        p.weight = w;
        changed = true;
      }
    }
  }
  if (changed) out.bump_version();
  return out;
}

}  // namespace aexplain
