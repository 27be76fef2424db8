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

#ifndef AEXPLAIN_KNOWLEDGE_HPP_
#define AEXPLAIN_KNOWLEDGE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "aexplain/constraints.hpp"

namespace aexplain {

// How one fault event manifests on one constraint: the smallest unit of
// knowledge. `sequences` is kept sorted; its size enters cost denominators.
struct Representation {
  std::string constraint_id;
  std::vector<std::string> sequences;
  Degree degree;  // F_r, mirrors the constraint kind

  friend bool operator==(const Representation&, const Representation&) = default;
};

// Signature equality: same constraint and same sequence set.
bool same_signature(const Representation& a, const Representation& b);

struct PossibleRep {
  Representation rep;
  double weight = 0.5;             // w in (0,1)
  std::uint64_t update_count = 0;  // k: degree-refinement count
  std::uint64_t n_pos = 0;         // co-occurrences with a consistent feature

  friend bool operator==(const PossibleRep&, const PossibleRep&) = default;
};

// R(E) = R* (certain manifestations) + R+ (weighted, uncertain ones).
// Invariants: R* nonempty; no two representations of one event share a
// (constraint, sequences) signature; weights stay strictly inside (0,1).
struct Explanation {
  std::string event_id;
  std::string label;
  std::vector<Representation> exact;
  std::vector<PossibleRep> possible;
  std::uint64_t n_pos = 0;  // appearances in solutions H

  friend bool operator==(const Explanation&, const Explanation&) = default;
};

class KnowledgeSet {
 public:
  KnowledgeSet() = default;
  // Validates every explanation invariant.
  KnowledgeSet(std::uint64_t version, std::vector<Explanation> events);

  std::uint64_t version() const { return version_; }
  std::size_t size() const { return events_.size(); }
  const std::vector<Explanation>& events() const { return events_; }
  std::vector<Explanation>& mutable_events() { return events_; }
  const Explanation* find(const std::string& event_id) const;

  void bump_version() { ++version_; }
  // Appends a new event; fails on duplicate ids or invariant violations.
  void add_event(Explanation event);

  std::size_t total_possible() const;

  friend bool operator==(const KnowledgeSet&, const KnowledgeSet&) = default;

 private:
  void reindex();

  std::uint64_t version_ = 1;
  std::vector<Explanation> events_;
  std::unordered_map<std::string, std::size_t> index_;
};

KnowledgeSet load_knowledge(std::istream& in);
KnowledgeSet load_knowledge_file(const std::string& path);
KnowledgeSet parse_knowledge_json(const std::string& json_text);
std::string knowledge_to_json(const KnowledgeSet& ks, int indent = 2);
void write_knowledge_file(const KnowledgeSet& ks, const std::string& path);

struct KnowledgeReport {
  std::vector<std::string> defects;
  std::vector<std::string> warnings;  // e.g. dangling constraint ids
  bool ok() const { return defects.empty(); }
};

// Cross-checks representations against the catalog (kinds, domains, weight
// ranges). Report-only.
KnowledgeReport validate_knowledge(const KnowledgeSet& ks,
                                   const ConstraintCatalog* catalog = nullptr);

// Removes ceil(inr_percent% of all possible representations), chosen
// uniformly by seed; exact sets are never touched. With one seed the removal
// sets of increasing percentages are nested, which the incompleteness
// experiments rely on.
KnowledgeSet degrade_knowledge(const KnowledgeSet& ks, double inr_percent,
                               std::uint64_t seed);

}  // namespace aexplain

#endif  // AEXPLAIN_KNOWLEDGE_HPP_
