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

#include "aexplain/knowledge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "aexplain/errors.hpp"

namespace aexplain {

using nlohmann::json;

namespace {

void validate_explanation(const Explanation& e) {
  if (e.event_id.empty()) {
    throw Error(ErrorKind::kSchemaError, "event with empty id");
  }
  if (e.exact.empty()) {
    throw Error(ErrorKind::kEmptyExactSet,
                "event '" + e.event_id + "': exact explanation set is empty");
  }
  auto check_rep = [&](const Representation& r) {
    if (r.constraint_id.empty() || r.sequences.empty()) {
      throw Error(ErrorKind::kSchemaError,
                  "event '" + e.event_id + "': representation missing constraint or sequences");
    }
    if (r.degree.quantitative) {
      if (r.degree.lo > r.degree.hi) {
        throw Error(ErrorKind::kSchemaError,
                    "event '" + e.event_id + "': representation degree lo > hi");
      }
    }
  };
  std::vector<const Representation*> all;
  for (const Representation& r : e.exact) {
    check_rep(r);
    all.push_back(&r);
  }
  for (const PossibleRep& p : e.possible) {
    check_rep(p.rep);
    if (!(p.weight > 0.0 && p.weight < 1.0)) {
      throw Error(ErrorKind::kSchemaError,
                  "event '" + e.event_id + "': weight " +
                      std::to_string(p.weight) + " outside (0,1)");
    }
    all.push_back(&p.rep);
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (same_signature(*all[i], *all[j])) {
        throw Error(ErrorKind::kOverlapError,
                    "event '" + e.event_id + "': representation on constraint '" +
                        all[i]->constraint_id + "' appears twice");
      }
    }
  }
}

Degree degree_from_json(const json& deg, const std::string& context) {
  if (deg.is_boolean()) {
    if (!deg.get<bool>()) {
      throw Error(ErrorKind::kSchemaError,
                  context + ": qualitative F_r must be true");
    }
    return Degree::boolean();
  }
  if (deg.is_array() && deg.size() == 2) {
    auto bound = [&](const json& b) -> double {
      if (b.is_number()) return b.get<double>();
      if (b.is_string()) {
        const std::string s = b.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
      }
      throw Error(ErrorKind::kSchemaError,
                  context + ": interval bound must be a number, \"inf\" or \"-inf\"");
    };
    return Degree::interval(bound(deg[0]), bound(deg[1]));
  }
  throw Error(ErrorKind::kSchemaError, context + ": F_r must be true or [d, u]");
}

json degree_to_json(const Degree& d) {
  if (!d.quantitative) return true;
  json out = json::array();
  auto bound = [](double v) -> json {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  };
  out.push_back(bound(d.lo));
  out.push_back(bound(d.hi));
  return out;
}

Representation rep_from_json(const json& item, const std::string& context) {
  Representation r;
  r.constraint_id = item.at("constraint_id").get<std::string>();
  r.sequences = item.at("sequences").get<std::vector<std::string>>();
  std::sort(r.sequences.begin(), r.sequences.end());
  r.degree = degree_from_json(item.at("F_r"), context);
  return r;
}

json rep_to_json(const Representation& r) {
  return {{"constraint_id", r.constraint_id},
          {"sequences", r.sequences},
          {"F_r", degree_to_json(r.degree)}};
}

}  // namespace

bool same_signature(const Representation& a, const Representation& b) {
  return a.constraint_id == b.constraint_id && a.sequences == b.sequences;
}

KnowledgeSet::KnowledgeSet(std::uint64_t version, std::vector<Explanation> events)
    : version_(version), events_(std::move(events)) {
  for (const Explanation& e : events_) validate_explanation(e);
  reindex();
}

void KnowledgeSet::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < events_.size(); ++i) {
    auto [it, inserted] = index_.emplace(events_[i].event_id, i);
    if (!inserted) {
      throw Error(ErrorKind::kSchemaError,
                  "duplicate event id '" + events_[i].event_id + "'");
    }
  }
}

const Explanation* KnowledgeSet::find(const std::string& event_id) const {
  auto it = index_.find(event_id);
  return it == index_.end() ? nullptr : &events_[it->second];
}

void KnowledgeSet::add_event(Explanation event) {
  validate_explanation(event);
  if (index_.count(event.event_id) > 0) {
    throw Error(ErrorKind::kSchemaError,
                "duplicate event id '" + event.event_id + "'");
  }
  index_.emplace(event.event_id, events_.size());
  events_.push_back(std::move(event));
}

std::size_t KnowledgeSet::total_possible() const {
  std::size_t total = 0;
  for (const Explanation& e : events_) total += e.possible.size();
  return total;
}

KnowledgeSet load_knowledge(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchemaError, std::string("knowledge JSON: ") + e.what());
  }
  std::vector<Explanation> events;
  std::uint64_t version = 1;
  try {
    version = doc.value("version", std::uint64_t{1});
    for (const json& ev : doc.at("events")) {
      Explanation e;
      e.event_id = ev.at("event_id").get<std::string>();
      e.label = ev.value("label", std::string{});
      e.n_pos = ev.value("n_pos", std::uint64_t{0});
      for (const json& item : ev.at("exact")) {
        e.exact.push_back(rep_from_json(item, "event '" + e.event_id + "' exact"));
      }
      if (ev.contains("possible")) {
        for (const json& item : ev.at("possible")) {
          PossibleRep p;
          p.rep = rep_from_json(item.at("rep"), "event '" + e.event_id + "' possible");
          p.weight = item.at("w").get<double>();
          p.update_count = item.value("k", std::uint64_t{0});
          p.n_pos = item.value("n_pos", std::uint64_t{0});
          e.possible.push_back(std::move(p));
        }
      }
      events.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchemaError, std::string("knowledge file: ") + e.what());
  }
  return KnowledgeSet(version, std::move(events));
}

KnowledgeSet load_knowledge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path);
  return load_knowledge(in);
}

KnowledgeSet parse_knowledge_json(const std::string& json_text) {
  std::istringstream in(json_text);
  return load_knowledge(in);
}

std::string knowledge_to_json(const KnowledgeSet& ks, int indent) {
  json events = json::array();
  for (const Explanation& e : ks.events()) {
    json exact = json::array();
    for (const Representation& r : e.exact) exact.push_back(rep_to_json(r));
    json possible = json::array();
    for (const PossibleRep& p : e.possible) {
      possible.push_back({{"rep", rep_to_json(p.rep)},
                          {"w", p.weight},
                          {"k", p.update_count},
                          {"n_pos", p.n_pos}});
    }
    events.push_back({{"event_id", e.event_id},
                      {"label", e.label},
                      {"exact", std::move(exact)},
                      {"possible", std::move(possible)},
                      {"n_pos", e.n_pos}});
  }
  json doc = {{"version", ks.version()}, {"events", std::move(events)}};
  return doc.dump(indent);
}

void write_knowledge_file(const KnowledgeSet& ks, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIoError, "cannot open " + path + " for writing");
  out << knowledge_to_json(ks) << '\n';
}

KnowledgeReport validate_knowledge(const KnowledgeSet& ks,
                                   const ConstraintCatalog* catalog) {
  KnowledgeReport report;
  for (const Explanation& e : ks.events()) {
    if (e.exact.empty()) {
      report.defects.push_back("event '" + e.event_id + "': empty exact set");
    }
    auto check_rep = [&](const Representation& r, double* weight) {
      if (weight != nullptr && !(*weight > 0.0 && *weight < 1.0)) {
        report.defects.push_back("event '" + e.event_id + "': weight " +
                                 std::to_string(*weight) + " out of (0,1)");
      }
      if (r.degree.quantitative && r.degree.lo > r.degree.hi) {
        report.defects.push_back("event '" + e.event_id +
                                 "': degree interval lo > hi on constraint '" +
                                 r.constraint_id + "'");
      }
      if (catalog == nullptr) return;
      const Constraint* c = catalog->find(r.constraint_id);
      if (c == nullptr) {
        report.warnings.push_back("event '" + e.event_id +
                                  "': dangling constraint '" + r.constraint_id + "'");
        return;
      }
      const bool want_quant = c->kind == ConstraintKind::kQuantitative;
      if (r.degree.quantitative != want_quant) {
        report.defects.push_back("event '" + e.event_id + "': representation kind mismatches " +
                                 constraint_kind_name(c->kind) + " constraint '" +
                                 r.constraint_id + "'");
      }
      std::vector<std::string> domain = c->domain;
      std::sort(domain.begin(), domain.end());
      if (!std::includes(domain.begin(), domain.end(), r.sequences.begin(),
                         r.sequences.end())) {
        report.defects.push_back("event '" + e.event_id +
                                 "': sequences outside the domain of constraint '" +
                                 r.constraint_id + "'");
      }
    };
    for (const Representation& r : e.exact) check_rep(r, nullptr);
    for (const PossibleRep& p : e.possible) {
      double w = p.weight;
      check_rep(p.rep, &w);
    }
  }
  return report;
}

KnowledgeSet degrade_knowledge(const KnowledgeSet& ks, double inr_percent,
                               std::uint64_t seed) {
  if (inr_percent < 0.0 || inr_percent > 100.0) {
    throw Error(ErrorKind::kUsageError, "inr_percent must be in [0, 100]");
  }
  const std::size_t total = ks.total_possible();
  const std::size_t k = static_cast<std::size_t>(
      std::ceil(total * inr_percent / 100.0));
  if (k == 0) return ks;

  // Partial Fisher-Yates over the flattened possible-rep index space; with a
  // fixed seed the first k picks are a prefix of one permutation, so larger
  // percentages remove supersets.
  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::vector<bool> removed(total, false);
  for (std::size_t i = 0; i < k && i < total; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (total - i));
    std::swap(order[i], order[j]);
    removed[order[i]] = true;
  }

  std::vector<Explanation> events = ks.events();
  std::size_t flat = 0;
  for (Explanation& e : events) {
    std::vector<PossibleRep> kept;
    kept.reserve(e.possible.size());
    for (PossibleRep& p : e.possible) {
      if (!removed[flat++]) kept.push_back(std::move(p));
    }
    e.possible = std::move(kept);
  }
  return KnowledgeSet(ks.version() + 1, std::move(events));
}

}  // namespace aexplain
