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

#include "aexplain/explain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "aexplain/detect.hpp"
#include "aexplain/errors.hpp"

namespace aexplain {

using nlohmann::json;

namespace {

bool subset_of(const std::vector<std::size_t>& a,
               const std::vector<std::size_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::size_t gain_of(const std::vector<std::size_t>& cover,
                    const std::vector<std::size_t>& uncovered) {
  std::size_t gain = 0;
  auto it = uncovered.begin();
  for (std::size_t f : cover) {
    it = std::lower_bound(it, uncovered.end(), f);
    if (it == uncovered.end()) break;
    if (*it == f) {
      ++gain;
      ++it;
    }
  }
  return gain;
}

void subtract_sorted(std::vector<std::size_t>& from,
                     const std::vector<std::size_t>& remove) {
  std::vector<std::size_t> out;
  out.reserve(from.size());
  std::set_difference(from.begin(), from.end(), remove.begin(), remove.end(),
                      std::back_inserter(out));
  from = std::move(out);
}

// Best distance over detected features matching the representation's
// signature; 1 when nothing matches.
double rep_distance(const Representation& r,
                    const std::vector<ViolationFeature>& features,
                    const MatchConfig& cfg) {
  double best = 1.0;
  for (const ViolationFeature& v : features) {
    if (!signature_matches(v, r)) continue;
    best = std::min(best, anomaly_distance(v, r, cfg));
  }
  return best;
}

struct Pick {
  const Candidate* candidate = nullptr;

  // Ratio comparison gain/cost via cross multiplication; higher ratio wins,
  // ties prefer larger gain then smaller event id.
  bool better_ratio(const Candidate& other, std::size_t gain,
                    std::size_t other_gain) const {
    if (candidate == nullptr) return true;
    const double lhs = static_cast<double>(other_gain) * candidate->cost;
    const double rhs = static_cast<double>(gain) * other.cost;
    if (lhs != rhs) return lhs > rhs;
    if (other_gain != gain) return other_gain > gain;
    return other.event_id < candidate->event_id;
  }
};

void append_chosen(Solution& sol, std::set<std::string>& seen,
                   const Candidate& c) {
  if (!seen.insert(c.event_id).second) return;
  sol.chosen.push_back({c.event_id, c.label, c.cost, c.cover});
  sol.total_cost += c.cost;
}

Solution finish_solution(Solution sol, std::vector<std::size_t> universe) {
  std::vector<std::size_t> covered;
  for (const ChosenEvent& e : sol.chosen) {
    covered.insert(covered.end(), e.covered.begin(), e.covered.end());
  }
  std::sort(covered.begin(), covered.end());
  covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
  subtract_sorted(universe, covered);
  sol.uncovered = std::move(universe);
  return sol;
}

Solution greedy_cover(const std::vector<Candidate>& candidates,
                      const std::vector<std::size_t>& universe) {
  Solution sol;
  std::set<std::string> seen;
  std::vector<std::size_t> un = universe;
  while (!un.empty()) {
    Pick best;
    std::size_t best_gain = 0;
    for (const Candidate& c : candidates) {
      if (seen.count(c.event_id)) continue;
      const std::size_t gain = gain_of(c.cover, un);
      if (gain == 0) continue;
      if (best.better_ratio(c, best_gain, gain)) {
        best.candidate = &c;
        best_gain = gain;
      }
    }
    if (best.candidate == nullptr) break;
    append_chosen(sol, seen, *best.candidate);
    subtract_sorted(un, best.candidate->cover);
  }
  return finish_solution(std::move(sol), universe);
}

Solution topk_cover(const std::vector<Candidate>& candidates,
                    const std::vector<std::size_t>& universe,
                    const BaselineContext& ctx) {
  std::vector<const Candidate*> order;
  order.reserve(candidates.size());
  for (const Candidate& c : candidates) order.push_back(&c);
  std::sort(order.begin(), order.end(),
            [](const Candidate* a, const Candidate* b) {
              if (a->cost != b->cost) return a->cost < b->cost;
              return a->event_id < b->event_id;
            });
  std::size_t k = 1;
  if (ctx.total_constraints > 0) {
    const double exact = static_cast<double>(ctx.knowledge_events) *
                         static_cast<double>(ctx.violated_constraints) /
                         static_cast<double>(ctx.total_constraints);
    k = static_cast<std::size_t>(std::max<long long>(1, std::llround(exact)));
  }
  Solution sol;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < order.size() && i < k; ++i) {
    append_chosen(sol, seen, *order[i]);
  }
  return finish_solution(std::move(sol), universe);
}

Solution ae_threshold_cover(const std::vector<Candidate>& candidates,
                            const std::vector<std::size_t>& universe,
                            const BaselineContext& ctx) {
  Solution sol;
  std::set<std::string> seen;
  for (const Candidate& c : candidates) {
    if (c.cover.empty()) continue;
    if (c.cost / static_cast<double>(c.cover.size()) <= ctx.lambda) {
      append_chosen(sol, seen, c);
    }
  }
  return finish_solution(std::move(sol), universe);
}

}  // namespace

bool Solution::contains(const std::string& event_id) const {
  for (const ChosenEvent& e : chosen) {
    if (e.event_id == event_id) return true;
  }
  return false;
}

double explanation_cost(const Explanation& event,
                        const std::vector<ViolationFeature>& features,
                        const MatchConfig& cfg) {
  double cost = 0.0;
  for (const Representation& r : event.exact) {
    const double d = rep_distance(r, features, cfg);
    if (d >= 1.0) {
      throw Error(ErrorKind::kNotACandidate,
                  "event '" + event.event_id + "': exact representation on '" +
                      r.constraint_id + "' has no matching feature");
    }
    cost += d / static_cast<double>(r.sequences.size());
  }
  for (const PossibleRep& p : event.possible) {
    const double d = rep_distance(p.rep, features, cfg);
    cost += p.weight * d / static_cast<double>(p.rep.sequences.size());
  }
  return cost;
}

std::vector<Candidate> candidate_explanations(
    const std::vector<ViolationFeature>& features, const CoverMap& cover_map,
    const KnowledgeSet& ks, const MatchConfig& cfg) {
  std::vector<Candidate> out;
  for (const Explanation& e : ks.events()) {
    bool cand = true;
    for (const Representation& r : e.exact) {
      if (rep_distance(r, features, cfg) >= 1.0) {
        cand = false;
        break;
      }
    }
    if (!cand) continue;
    Candidate c;
    c.event_id = e.event_id;
    c.label = e.label;
    auto it = cover_map.cover.find(e.event_id);
    if (it != cover_map.cover.end()) c.cover = it->second;
    c.cost = explanation_cost(e, features, cfg);
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    return a.event_id < b.event_id;
  });
  return out;
}

PruneForceResult prune_and_force(const std::vector<Candidate>& candidates,
                                 const std::vector<std::size_t>& universe) {
  PruneForceResult res;
  // A candidate is dominated when another covers at least as much strictly
  // cheaper. Domination chains end at a survivor, so one sweep suffices.
  std::vector<bool> pruned(candidates.size(), false);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (i == j) continue;
      if (subset_of(candidates[i].cover, candidates[j].cover) &&
          candidates[i].cost > candidates[j].cost) {
        pruned[i] = true;
        res.pruned_ids.push_back(candidates[i].event_id);
        break;
      }
    }
  }

  std::vector<const Candidate*> alive;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!pruned[i]) alive.push_back(&candidates[i]);
  }

  std::set<std::string> forced_ids;
  for (std::size_t f : universe) {
    const Candidate* only = nullptr;
    bool unique = true;
    for (const Candidate* c : alive) {
      if (!std::binary_search(c->cover.begin(), c->cover.end(), f)) continue;
      if (only != nullptr) {
        unique = false;
        break;
      }
      only = c;
    }
    if (unique && only != nullptr) forced_ids.insert(only->event_id);
  }

  std::vector<std::size_t> forced_cover;
  for (const Candidate* c : alive) {
    if (forced_ids.count(c->event_id)) {
      res.forced.push_back(*c);
      forced_cover.insert(forced_cover.end(), c->cover.begin(), c->cover.end());
    } else {
      res.remaining.push_back(*c);
    }
  }
  std::sort(forced_cover.begin(), forced_cover.end());
  forced_cover.erase(std::unique(forced_cover.begin(), forced_cover.end()),
                     forced_cover.end());
  res.reduced_universe = universe;
  subtract_sorted(res.reduced_universe, forced_cover);
  return res;
}

Solution solve_aec(const std::vector<Candidate>& candidates,
                   const std::vector<std::size_t>& universe,
                   const std::vector<ViolationFeature>& features) {
  PruneForceResult pf = prune_and_force(candidates, universe);

  Solution sol;
  std::set<std::string> seen;
  for (const Candidate& c : pf.forced) append_chosen(sol, seen, c);

  // Multi-sequence features first, most-involved sequences foremost.
  std::vector<std::size_t> multi;
  for (std::size_t f : pf.reduced_universe) {
    if (features[f].involved() > 1) multi.push_back(f);
  }
  std::stable_sort(multi.begin(), multi.end(),
                   [&](std::size_t a, std::size_t b) {
                     return features[a].involved() > features[b].involved();
                   });
  for (std::size_t f : multi) {
    const Candidate* best = nullptr;
    for (const Candidate& c : pf.remaining) {
      if (!std::binary_search(c.cover.begin(), c.cover.end(), f)) continue;
      if (best == nullptr || c.cost < best->cost ||
          (c.cost == best->cost && c.event_id < best->event_id)) {
        best = &c;
      }
    }
    if (best != nullptr) append_chosen(sol, seen, *best);
  }

  // Residue by gain/cost ratio.
  std::vector<std::size_t> un = pf.reduced_universe;
  for (const ChosenEvent& e : sol.chosen) subtract_sorted(un, e.covered);
  while (!un.empty()) {
    Pick best;
    std::size_t best_gain = 0;
    for (const Candidate& c : pf.remaining) {
      if (seen.count(c.event_id)) continue;
      const std::size_t gain = gain_of(c.cover, un);
      if (gain == 0) continue;
      if (best.better_ratio(c, best_gain, gain)) {
        best.candidate = &c;
        best_gain = gain;
      }
    }
    if (best.candidate == nullptr) break;  // residue stays uncovered
    append_chosen(sol, seen, *best.candidate);
    subtract_sorted(un, best.candidate->cover);
  }
  return finish_solution(std::move(sol), universe);
}

namespace {

struct BruteBest {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<std::string> ids;
  bool found = false;
};

template <typename OnOptimal>
void enumerate_covers(const std::vector<Candidate>& candidates,
                      const std::vector<std::size_t>& universe,
                      BruteBest& best, OnOptimal on_optimal) {
  if (candidates.size() > 20) {
    throw Error(ErrorKind::kInstanceTooLarge,
                "brute force capped at 20 candidates, got " +
                    std::to_string(candidates.size()));
  }
  std::vector<const Candidate*> order;
  for (const Candidate& c : candidates) order.push_back(&c);
  std::sort(order.begin(), order.end(),
            [](const Candidate* a, const Candidate* b) {
              return a->event_id < b->event_id;
            });
  const std::uint32_t limit = 1u << order.size();
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    std::vector<std::size_t> covered;
    double cost = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if ((mask >> i) & 1u) {
        cost += order[i]->cost;
        covered.insert(covered.end(), order[i]->cover.begin(),
                       order[i]->cover.end());
      }
    }
    std::sort(covered.begin(), covered.end());
    covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
    if (!subset_of(universe, covered)) continue;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if ((mask >> i) & 1u) ids.push_back(order[i]->event_id);
    }
    if (!best.found || cost < best.cost ||
        (cost == best.cost && ids < best.ids)) {
      best.found = true;
      best.cost = cost;
      best.ids = std::move(ids);
    }
    on_optimal(mask, cost);
  }
}

}  // namespace

Solution brute_force_cover(const std::vector<Candidate>& candidates,
                           const std::vector<std::size_t>& universe) {
  BruteBest best;
  enumerate_covers(candidates, universe, best, [](std::uint32_t, double) {});
  if (!best.found) {
    throw Error(ErrorKind::kInfeasible, "no candidate subset covers the features");
  }
  Solution sol;
  std::set<std::string> seen;
  for (const std::string& id : best.ids) {
    for (const Candidate& c : candidates) {
      if (c.event_id == id) append_chosen(sol, seen, c);
    }
  }
  return finish_solution(std::move(sol), universe);
}

std::vector<std::vector<std::string>> brute_force_optima(
    const std::vector<Candidate>& candidates,
    const std::vector<std::size_t>& universe) {
  BruteBest best;
  std::vector<std::pair<std::uint32_t, double>> feasible;
  enumerate_covers(candidates, universe, best,
                   [&](std::uint32_t mask, double cost) {
                     feasible.emplace_back(mask, cost);
                   });
  std::vector<std::vector<std::string>> optima;
  if (!best.found) return optima;
  std::vector<const Candidate*> order;
  for (const Candidate& c : candidates) order.push_back(&c);
  std::sort(order.begin(), order.end(),
            [](const Candidate* a, const Candidate* b) {
              return a->event_id < b->event_id;
            });
  for (auto [mask, cost] : feasible) {
    if (std::abs(cost - best.cost) > 1e-9) continue;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if ((mask >> i) & 1u) ids.push_back(order[i]->event_id);
    }
    optima.push_back(std::move(ids));
  }
  return optima;
}

Solution run_baseline(const std::string& name,
                      const std::vector<Candidate>& candidates,
                      const std::vector<std::size_t>& universe,
                      const std::vector<ViolationFeature>& features,
                      const BaselineContext& ctx) {
  if (name == "AEC" || name == "MFnC") {
    return solve_aec(candidates, universe, features);
  }
  if (name == "greedyC" || name == "greedynC") {
    return greedy_cover(candidates, universe);
  }
  if (name == "TopK") return topk_cover(candidates, universe, ctx);
  if (name == "AE") return ae_threshold_cover(candidates, universe, ctx);
  throw Error(ErrorKind::kUnknownBaseline, "unknown method '" + name + "'");
}

ExplainResult explain_features(const std::vector<ViolationFeature>& features,
                               const KnowledgeSet& ks,
                               const ConstraintCatalog& catalog,
                               const ExplainConfig& cfg) {
  ExplainResult res;
  res.features = features;
  res.cover_map = build_cover_map(res.features, ks, cfg.match);
  res.candidates =
      candidate_explanations(res.features, res.cover_map, ks, cfg.match);

  std::unordered_set<std::string> violated;
  for (const ViolationFeature& f : res.features) violated.insert(f.constraint_id);
  res.violated_constraints = violated.size();

  BaselineContext ctx;
  ctx.knowledge_events = ks.size();
  ctx.total_constraints = catalog.size();
  ctx.violated_constraints = res.violated_constraints;
  ctx.lambda = cfg.lambda;

  res.solution = run_baseline(cfg.method, res.candidates,
                              res.cover_map.explicable, res.features, ctx);
  return res;
}

std::string explanation_report_json(const ExplainResult& result,
                                    const ExplainConfig& cfg, int indent) {
  json chosen = json::array();
  for (const ChosenEvent& e : result.solution.chosen) {
    chosen.push_back({{"event_id", e.event_id},
                      {"label", e.label},
                      {"cost", e.cost},
                      {"covered", e.covered}});
  }
  json set_b = json::array();
  for (const SetBEntry& b : result.cover_map.unmatched_knowledge) {
    set_b.push_back({{"event_id", b.event_id},
                     {"constraint_id", b.constraint_id},
                     {"sequences", b.sequences}});
  }
  json doc = {
      {"method", cfg.method},
      {"solution", std::move(chosen)},
      {"uncovered", result.solution.uncovered},
      {"set_b", set_b},
      {"set_c", result.cover_map.inexplicable},
      {"unmatched_knowledge", std::move(set_b)},
      {"inexplicable_features", result.cover_map.inexplicable},
      {"total_cost", result.solution.total_cost},
      {"config",
       {{"theta", cfg.match.theta},
        {"lambda", cfg.lambda},
        {"clamp", {cfg.match.clamp.lo, cfg.match.clamp.hi}},
        {"split_detection", cfg.split_detection}}},
  };
  // Feature list so covered/uncovered indices resolve without the input file.
  doc["features"] = json::parse(features_to_json(result.features, -1));
  return doc.dump(indent);
}

}  // namespace aexplain
