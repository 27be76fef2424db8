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

#ifndef AEXPLAIN_HARNESS_HPP_
#define AEXPLAIN_HARNESS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "aexplain/detect.hpp"
#include "aexplain/explain.hpp"
#include "aexplain/knowledge.hpp"
#include "aexplain/time_series.hpp"

namespace aexplain {

struct WorldSpec {
  std::size_t sensors = 64;
  std::size_t points = 10800;
  // Catalog size; 0 keeps the natural size (3 per sensor plus one per
  // mechanism group and similarity pair), smaller values take a seeded
  // prefix of a fixed shuffle so catalogs of growing size are nested.
  std::size_t constraints = 0;
  std::size_t knowledge_events = 60;
  std::uint64_t seed = 1;
  Timestamp start_time = 1704067200000;  // 2024-01-01T00:00:00Z
  Timestamp sample_interval_ms = 60000;
};

// Per-sensor signal parameters for the synthetic fixture generator.
struct SensorModel {
  std::string id;
  double center = 50.0;
  double amplitude = 6.0;
  std::size_t period = 300;  // samples
  double phase = 0.0;
  double noise = 0.1;
  enum class Role { kSpeedHome, kVarianceHome, kMechMember, kMechDerived, kSimMember };
  Role role = Role::kSpeedHome;
};

struct MechGroupModel {
  std::size_t member_a = 0;
  std::size_t member_b = 0;
  std::size_t derived = 0;
  double coeff_a = 1.0;
  double coeff_b = 1.0;
  double offset = 0.0;
  double noise = 0.05;
};

struct SimPairModel {
  std::size_t member_a = 0;
  std::size_t member_b = 0;
  double noise = 0.05;
};

// A self-consistent catalog + knowledge + signal model triple: clean data
// generated from the models satisfies every catalog constraint, and every
// knowledge event can be made to happen by perturbing the data.
struct SyntheticWorld {
  WorldSpec spec;
  ConstraintCatalog catalog;
  KnowledgeSet knowledge;
  std::vector<SensorModel> sensors;
  std::vector<MechGroupModel> mech_groups;
  std::vector<SimPairModel> sim_pairs;
  std::vector<std::string> injectable_events;  // real (non-decoy) event ids
};

SyntheticWorld build_world(const WorldSpec& spec);

// Deterministic clean bundle for the world's signal models, re-sampled (with
// a derived seed) until the catalog reports no violations.
SeriesBundle generate_clean(const SyntheticWorld& world, std::size_t points,
                            std::uint64_t seed);

struct PlannedEvent {
  std::string event_id;
  TimeInterval interval{0, 0};
  double magnitude = 1.0;
};

struct InjectionPlan {
  std::vector<PlannedEvent> events;
  std::uint64_t seed = 1;
  // Aim the violation metric near the top of the knowledge band instead of
  // its middle, to stress the consistency threshold.
  bool near_boundary = false;
};

// Samples real events and assigns them disjoint time slots.
InjectionPlan make_plan(const SyntheticWorld& world, const SeriesBundle& bundle,
                        std::size_t n_events, std::uint64_t seed,
                        bool near_boundary = false);

struct GroundTruthLabel {
  std::string event_id;
  TimeInterval interval{0, 0};
};

struct InjectResult {
  SeriesBundle bundle;
  std::vector<GroundTruthLabel> labels;
  std::vector<std::string> notes;  // skipped representations etc.
};

// Perturbs the data so each planned event's exact representations are
// violated with a degree inside their knowledge bands; possible
// representations fire with their weight as probability. Works from catalog
// parameters and local signal statistics only.
InjectResult inject_anomalies(const SeriesBundle& clean,
                              const InjectionPlan& plan, const KnowledgeSet& ks,
                              const ConstraintCatalog& catalog);

std::string plan_to_json(const InjectionPlan& plan, int indent = 2);
InjectionPlan plan_from_json(const std::string& json_text);
std::string labels_to_json(const std::vector<GroundTruthLabel>& labels,
                           int indent = 2);
std::vector<GroundTruthLabel> labels_from_json(const std::string& json_text);

struct ScoreCard {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<std::string> true_positives;
  std::vector<std::string> false_positives;
  std::vector<std::string> false_negatives;
};

ScoreCard precision_recall(const std::vector<std::string>& identified,
                           const std::vector<std::string>& actual);

struct GridSpec {
  std::vector<std::size_t> constraints = {210};
  std::vector<std::size_t> points = {10800};
  std::vector<std::size_t> anomaly_events = {20};
  std::vector<double> inr = {0.0};
  std::vector<std::string> methods = {"AEC"};
  std::size_t sensors = 64;
  std::size_t knowledge_events = 60;
  std::size_t seeds = 1;
  std::uint64_t base_seed = 1;
  double theta = 0.9;
  double lambda = 0.4;
  double w0 = 0.5;
  unsigned threads = 1;
};

struct ResultRow {
  std::string method;
  std::size_t constraints = 0;
  std::size_t points = 0;
  std::size_t anomaly_events = 0;
  double inr = 0.0;
  std::uint64_t seed = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ae_time_ms = 0.0;
  double up_time_ms = 0.0;
  bool failed = false;
  std::string error;
};

// Full pipeline per grid cell and seed: generate, inject, detect, explain
// (and degrade/update for the rRemove/Update methods), score. Failed cells
// carry their error and the run continues.
std::vector<ResultRow> run_experiment(const GridSpec& grid);

std::string results_to_csv(const std::vector<ResultRow>& rows);
std::string results_to_json(const std::vector<ResultRow>& rows, int indent = 2);

}  // namespace aexplain

#endif  // AEXPLAIN_HARNESS_HPP_
