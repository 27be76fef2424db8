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

#ifndef AEXPLAIN_CONSTRAINTS_HPP_
#define AEXPLAIN_CONSTRAINTS_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "aexplain/time_series.hpp"

namespace aexplain {

// Table position in the single/multi-sequence x point/interval taxonomy.
enum class ConstraintType { kT1, kT2, kT3, kT4 };

enum class ConstraintKind { kQualitative, kQuantitative };

const char* constraint_type_name(ConstraintType t);
const char* constraint_kind_name(ConstraintKind k);

// x must stay inside [lo, hi].
struct ValueDomainSpec {
  double lo;
  double hi;
};

// |sum_i coeffs[i]*S_i(t) + offset| <= tolerance at every shared time point.
struct MechanismSpec {
  std::vector<double> coeffs;
  double offset = 0.0;
  double tolerance = 0.0;
};

// |dx/dt| <= max_rate, dt in seconds.
struct SpeedSpec {
  double max_rate;
};

// Population variance of each tumbling window <= max_var.
struct VarianceSpec {
  std::size_t window_len;
  double max_var;
};

// Pearson correlation of a sequence pair per tumbling window >= min_corr.
struct SimilaritySpec {
  std::size_t window_len;
  double min_corr;
};

using MeasurementSpec = std::variant<ValueDomainSpec, MechanismSpec, SpeedSpec,
                                     VarianceSpec, SimilaritySpec>;

// Violation metrics are unit-free "normalized excess" values; both feature
// degrees and knowledge degrees are clamped into this range before any
// interval arithmetic so infinities stay measurable.
struct MetricDomain {
  double lo = -10.0;
  double hi = 10.0;

  double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
};

struct Constraint {
  std::string id;
  ConstraintType ctype = ConstraintType::kT1;
  ConstraintKind kind = ConstraintKind::kQuantitative;
  std::vector<std::string> domain;  // ordered sensor ids
  MeasurementSpec check = ValueDomainSpec{0.0, 0.0};
  MetricDomain metric_domain;

  bool multi_sequence() const { return domain.size() > 1; }
  std::optional<std::size_t> window_len() const;
};

class ConstraintCatalog {
 public:
  ConstraintCatalog() = default;
  // Validates arity, variant/type coherence and parameter ranges.
  explicit ConstraintCatalog(std::vector<Constraint> constraints);

  std::size_t size() const { return constraints_.size(); }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const Constraint* find(const std::string& id) const;

 private:
  std::vector<Constraint> constraints_;
  std::unordered_map<std::string, std::size_t> index_;
};

ConstraintCatalog load_catalog(std::istream& in);
ConstraintCatalog load_catalog_file(const std::string& path);
ConstraintCatalog parse_catalog_json(const std::string& json_text);
std::string catalog_to_json(const ConstraintCatalog& catalog, int indent = 2);

// A degree value F: Boolean for qualitative constraints (stored features are
// always "violated"), a metric interval [lo, hi] for quantitative ones.
struct Degree {
  bool quantitative = true;
  double lo = 0.0;
  double hi = 0.0;

  static Degree boolean() { return Degree{false, 1.0, 1.0}; }
  static Degree interval(double lo, double hi) { return Degree{true, lo, hi}; }

  friend bool operator==(const Degree&, const Degree&) = default;
};

// Evidence that one constraint is broken in one interval. Multi-sequence
// violations yield a single feature over all involved sequences.
struct ViolationFeature {
  std::string constraint_id;
  std::vector<std::string> sequences;  // sorted
  Degree degree;                       // clamped to the metric domain
  TimeInterval interval{0, 0};
  std::size_t involved() const { return sequences.size(); }  // v.K

  friend bool operator==(const ViolationFeature&, const ViolationFeature&) = default;
};

}  // namespace aexplain

#endif  // AEXPLAIN_CONSTRAINTS_HPP_
