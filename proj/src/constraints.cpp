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

#include "aexplain/constraints.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "aexplain/errors.hpp"

namespace aexplain {

using nlohmann::json;

namespace {

void require_finite(double v, const std::string& what, const std::string& id) {
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::kSchemaError,
                "constraint '" + id + "': " + what + " must be finite");
  }
}

void validate_constraint(const Constraint& c) {
  if (c.id.empty()) {
    throw Error(ErrorKind::kSchemaError, "constraint with empty id");
  }
  if (c.domain.empty()) {
    throw Error(ErrorKind::kDomainArityError,
                "constraint '" + c.id + "': empty sensor domain");
  }
  const bool single = c.ctype == ConstraintType::kT1 || c.ctype == ConstraintType::kT3;
  if (single && c.domain.size() != 1) {
    throw Error(ErrorKind::kDomainArityError,
                "constraint '" + c.id + "': " +
                    constraint_type_name(c.ctype) + " requires exactly one sensor, got " +
                    std::to_string(c.domain.size()));
  }
  if (!single && c.domain.size() < 2) {
    throw Error(ErrorKind::kDomainArityError,
                "constraint '" + c.id + "': " + constraint_type_name(c.ctype) +
                    " requires at least two sensors");
  }
  if (!(c.metric_domain.lo < c.metric_domain.hi)) {
    throw Error(ErrorKind::kSchemaError,
                "constraint '" + c.id + "': metric_domain must satisfy lo < hi");
  }
  require_finite(c.metric_domain.lo, "metric_domain.lo", c.id);
  require_finite(c.metric_domain.hi, "metric_domain.hi", c.id);

  struct Check {
    const Constraint& c;
    void operator()(const ValueDomainSpec& s) const {
      expect_type(ConstraintType::kT1, "value_domain");
      require_finite(s.lo, "lo", c.id);
      require_finite(s.hi, "hi", c.id);
      if (s.lo > s.hi) {
        throw Error(ErrorKind::kSchemaError,
                    "constraint '" + c.id + "': value domain lo > hi");
      }
    }
    void operator()(const MechanismSpec& s) const {
      expect_type(ConstraintType::kT2, "mechanism");
      if (s.coeffs.size() != c.domain.size()) {
        throw Error(ErrorKind::kSchemaError,
                    "constraint '" + c.id + "': mechanism needs one coefficient per sensor");
      }
      for (double a : s.coeffs) require_finite(a, "coefficient", c.id);
      require_finite(s.offset, "offset", c.id);
      require_finite(s.tolerance, "tolerance", c.id);
      if (s.tolerance < 0) {
        throw Error(ErrorKind::kSchemaError,
                    "constraint '" + c.id + "': negative tolerance");
      }
    }
    void operator()(const SpeedSpec& s) const {
      expect_type(ConstraintType::kT3, "speed");
      require_finite(s.max_rate, "max_rate", c.id);
      if (s.max_rate < 0) {
        throw Error(ErrorKind::kSchemaError,
                    "constraint '" + c.id + "': negative max_rate");
      }
    }
    void operator()(const VarianceSpec& s) const {
      expect_type(ConstraintType::kT3, "variance");
      if (s.window_len < 2) {
        throw Error(ErrorKind::kSchemaError,
                    "constraint '" + c.id + "': window_len must be >= 2");
      }
      require_finite(s.max_var, "max_var", c.id);
      if (s.max_var < 0) {
        throw Error(ErrorKind::kSchemaError,
                    "constraint '" + c.id + "': negative max_var");
      }
    }
    void operator()(const SimilaritySpec& s) const {
      expect_type(ConstraintType::kT4, "similarity");
      if (c.domain.size() != 2) {
        throw Error(ErrorKind::kDomainArityError,
                    "constraint '" + c.id + "': similarity is defined on a sequence pair");
      }
      if (s.window_len < 2) {
        throw Error(ErrorKind::kSchemaError,
                    "constraint '" + c.id + "': window_len must be >= 2");
      }
      require_finite(s.min_corr, "min_corr", c.id);
      if (s.min_corr < -1.0 || s.min_corr > 1.0) {
        throw Error(ErrorKind::kSchemaError,
                    "constraint '" + c.id + "': min_corr outside [-1, 1]");
      }
    }
    void expect_type(ConstraintType want, const char* variant) const {
      if (c.ctype != want) {
        throw Error(ErrorKind::kSchemaError,
                    "constraint '" + c.id + "': check variant '" +
                        std::string(variant) + "' requires ctype " +
                        constraint_type_name(want));
      }
    }
  };
  std::visit(Check{c}, c.check);
}

ConstraintType parse_ctype(const std::string& s, const std::string& id) {
  if (s == "T1") return ConstraintType::kT1;
  if (s == "T2") return ConstraintType::kT2;
  if (s == "T3") return ConstraintType::kT3;
  if (s == "T4") return ConstraintType::kT4;
  throw Error(ErrorKind::kSchemaError,
              "constraint '" + id + "': unknown ctype '" + s + "'");
}

ConstraintKind parse_kind(const std::string& s, const std::string& id) {
  if (s == "qualitative") return ConstraintKind::kQualitative;
  if (s == "quantitative") return ConstraintKind::kQuantitative;
  throw Error(ErrorKind::kSchemaError,
              "constraint '" + id + "': unknown kind '" + s + "'");
}

MeasurementSpec parse_check(const json& check, std::size_t fallback_window,
                            const std::string& id) {
  if (!check.is_object() || !check.contains("variant")) {
    throw Error(ErrorKind::kSchemaError,
                "constraint '" + id + "': check must be an object with a variant");
  }
  const std::string variant = check.at("variant").get<std::string>();
  auto num = [&](const char* key) -> double {
    if (!check.contains(key) || !check.at(key).is_number()) {
      throw Error(ErrorKind::kSchemaError, "constraint '" + id +
                                               "': check." + key +
                                               " missing or not a number");
    }
    return check.at(key).get<double>();
  };
  auto window = [&]() -> std::size_t {
    if (check.contains("window_len")) {
      return check.at("window_len").get<std::size_t>();
    }
    if (fallback_window > 0) return fallback_window;
    throw Error(ErrorKind::kSchemaError,
                "constraint '" + id + "': missing window_len");
  };
  if (variant == "value_domain") return ValueDomainSpec{num("lo"), num("hi")};
  if (variant == "mechanism") {
    MechanismSpec s;
    if (!check.contains("coeffs") || !check.at("coeffs").is_array()) {
      throw Error(ErrorKind::kSchemaError,
                  "constraint '" + id + "': mechanism needs a coeffs array");
    }
    s.coeffs = check.at("coeffs").get<std::vector<double>>();
    s.offset = check.value("offset", 0.0);
    s.tolerance = num("tolerance");
    return s;
  }
  if (variant == "speed") return SpeedSpec{num("max_rate")};
  if (variant == "variance") return VarianceSpec{window(), num("max_var")};
  if (variant == "similarity") return SimilaritySpec{window(), num("min_corr")};
  throw Error(ErrorKind::kSchemaError,
              "constraint '" + id + "': unknown check variant '" + variant + "'");
}

json check_to_json(const MeasurementSpec& spec) {
  struct Out {
    json operator()(const ValueDomainSpec& s) const {
      return {{"variant", "value_domain"}, {"lo", s.lo}, {"hi", s.hi}};
    }
    json operator()(const MechanismSpec& s) const {
      return {{"variant", "mechanism"},
              {"coeffs", s.coeffs},
              {"offset", s.offset},
              {"tolerance", s.tolerance}};
    }
    json operator()(const SpeedSpec& s) const {
      return {{"variant", "speed"}, {"max_rate", s.max_rate}};
    }
    json operator()(const VarianceSpec& s) const {
      return {{"variant", "variance"},
              {"window_len", s.window_len},
              {"max_var", s.max_var}};
    }
    json operator()(const SimilaritySpec& s) const {
      return {{"variant", "similarity"},
              {"window_len", s.window_len},
              {"min_corr", s.min_corr}};
    }
  };
  return std::visit(Out{}, spec);
}

}  // namespace

const char* constraint_type_name(ConstraintType t) {
  switch (t) {
    case ConstraintType::kT1: return "T1";
    case ConstraintType::kT2: return "T2";
    case ConstraintType::kT3: return "T3";
    case ConstraintType::kT4: return "T4";
  }
  return "?";
}

const char* constraint_kind_name(ConstraintKind k) {
  return k == ConstraintKind::kQualitative ? "qualitative" : "quantitative";
}

std::optional<std::size_t> Constraint::window_len() const {
  if (const auto* v = std::get_if<VarianceSpec>(&check)) return v->window_len;
  if (const auto* s = std::get_if<SimilaritySpec>(&check)) return s->window_len;
  return std::nullopt;
}

ConstraintCatalog::ConstraintCatalog(std::vector<Constraint> constraints)
    : constraints_(std::move(constraints)) {
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    validate_constraint(constraints_[i]);
    auto [it, inserted] = index_.emplace(constraints_[i].id, i);
    if (!inserted) {
      throw Error(ErrorKind::kSchemaError,
                  "duplicate constraint id '" + constraints_[i].id + "'");
    }
  }
}

const Constraint* ConstraintCatalog::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &constraints_[it->second];
}

ConstraintCatalog load_catalog(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchemaError, std::string("catalog JSON: ") + e.what());
  }
  if (!doc.is_array()) {
    throw Error(ErrorKind::kSchemaError, "catalog must be a JSON array");
  }
  std::vector<Constraint> constraints;
  constraints.reserve(doc.size());
  for (const json& item : doc) {
    Constraint c;
    try {
      c.id = item.at("id").get<std::string>();
      c.ctype = parse_ctype(item.at("ctype").get<std::string>(), c.id);
      c.kind = parse_kind(item.at("kind").get<std::string>(), c.id);
      c.domain = item.at("domain").get<std::vector<std::string>>();
      const std::size_t fallback_window = item.value("window", std::size_t{0});
      c.check = parse_check(item.at("check"), fallback_window, c.id);
      if (item.contains("metric_domain")) {
        const json& md = item.at("metric_domain");
        if (!md.is_array() || md.size() != 2) {
          throw Error(ErrorKind::kSchemaError,
                      "constraint '" + c.id + "': metric_domain must be [lo, hi]");
        }
        c.metric_domain = {md[0].get<double>(), md[1].get<double>()};
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kSchemaError,
                  std::string("catalog entry: ") + e.what());
    }
    constraints.push_back(std::move(c));
  }
  return ConstraintCatalog(std::move(constraints));
}

ConstraintCatalog load_catalog_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path);
  return load_catalog(in);
}

ConstraintCatalog parse_catalog_json(const std::string& json_text) {
  std::istringstream in(json_text);
  return load_catalog(in);
}

std::string catalog_to_json(const ConstraintCatalog& catalog, int indent) {
  json doc = json::array();
  for (const Constraint& c : catalog.constraints()) {
    json item = {
        {"id", c.id},
        {"ctype", constraint_type_name(c.ctype)},
        {"kind", constraint_kind_name(c.kind)},
        {"domain", c.domain},
        {"check", check_to_json(c.check)},
    };
    if (c.metric_domain.lo != -10.0 || c.metric_domain.hi != 10.0) {
      item["metric_domain"] = {c.metric_domain.lo, c.metric_domain.hi};
    }
    doc.push_back(std::move(item));
  }
  return doc.dump(indent);
}

}  // namespace aexplain
