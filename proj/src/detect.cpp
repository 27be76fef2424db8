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

#include "aexplain/detect.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "aexplain/errors.hpp"
#include "aexplain/kernels.hpp"

namespace aexplain {

using nlohmann::json;

namespace {

constexpr double kMsPerSecond = 1000.0;

double denom_for_bound(double bound) {
  const double mag = std::fabs(bound);
  return mag < 1.0 ? 1.0 : mag;
}

// Sample positions over several sequences that share a timestamp; columns are
// contiguous per sensor so the kernels can scan them.
struct AlignedView {
  std::vector<Timestamp> times;
  std::vector<std::vector<double>> values;  // one column per sensor
};

AlignedView align_intersection(const std::vector<const Sequence*>& seqs) {
  AlignedView view;
  view.values.resize(seqs.size());
  if (seqs.empty()) return view;
  std::vector<std::size_t> pos(seqs.size(), 0);
  for (;;) {
    Timestamp target = std::numeric_limits<Timestamp>::min();
    for (std::size_t k = 0; k < seqs.size(); ++k) {
      if (pos[k] >= seqs[k]->size()) return view;
      target = std::max(target, seqs[k]->times()[pos[k]]);
    }
    bool all_equal = true;
    for (std::size_t k = 0; k < seqs.size(); ++k) {
      while (pos[k] < seqs[k]->size() && seqs[k]->times()[pos[k]] < target) {
        ++pos[k];
      }
      if (pos[k] >= seqs[k]->size()) return view;
      all_equal = all_equal && seqs[k]->times()[pos[k]] == target;
    }
    if (all_equal) {
      view.times.push_back(target);
      for (std::size_t k = 0; k < seqs.size(); ++k) {
        view.values[k].push_back(seqs[k]->values()[pos[k]]);
        ++pos[k];
      }
    }
  }
}

// Index range [first, last) of samples with interval.lo <= t <= interval.hi.
std::pair<std::size_t, std::size_t> range_in(std::span<const Timestamp> times,
                                             const TimeInterval& interval) {
  auto lo = std::lower_bound(times.begin(), times.end(), interval.lo);
  auto hi = std::upper_bound(times.begin(), times.end(), interval.hi);
  return {static_cast<std::size_t>(lo - times.begin()),
          static_cast<std::size_t>(hi - times.begin())};
}

Degree make_degree(const Constraint& c, const kernels::ScanStats& stats) {
  if (c.kind == ConstraintKind::kQualitative) return Degree::boolean();
  return Degree::interval(c.metric_domain.clamp(stats.metric_min),
                          c.metric_domain.clamp(stats.metric_max));
}

ViolationFeature make_feature(const Constraint& c, const Degree& degree,
                              TimeInterval observed) {
  ViolationFeature f;
  f.constraint_id = c.id;
  f.sequences = c.domain;
  std::sort(f.sequences.begin(), f.sequences.end());
  f.degree = degree;
  f.interval = observed;
  return f;
}

const Sequence& require_sensor(const SeriesBundle& bundle,
                               const std::string& sensor_id,
                               const std::string& constraint_id) {
  const Sequence* s = bundle.find(sensor_id);
  if (s == nullptr) {
    throw Error(ErrorKind::kMissingSensor,
                "constraint '" + constraint_id + "': sensor '" + sensor_id +
                    "' not in bundle");
  }
  return *s;
}

EvalOutcome eval_value_domain(const Constraint& c, const ValueDomainSpec& spec,
                              const SeriesBundle& bundle,
                              const TimeInterval& interval) {
  const Sequence& seq = require_sensor(bundle, c.domain[0], c.id);
  const auto times = seq.times();
  auto [first, last] = range_in(times, interval);
  if (first >= last) return {};
  const auto stats = kernels::active().band_excess(
      seq.values().data() + first, last - first, spec.lo, spec.hi,
      denom_for_bound(spec.lo), denom_for_bound(spec.hi));
  if (stats.count == 0) return {};
  TimeInterval observed{times[first + stats.first], times[first + stats.last]};
  return {make_feature(c, make_degree(c, stats), observed), std::nullopt};
}

EvalOutcome eval_speed(const Constraint& c, const SpeedSpec& spec,
                       const SeriesBundle& bundle, const TimeInterval& interval) {
  const Sequence& seq = require_sensor(bundle, c.domain[0], c.id);
  const auto times = seq.times();
  auto [first, last] = range_in(times, interval);
  if (last - first < 2) {
    return {std::nullopt, "constraint '" + c.id + "': fewer than 2 samples in interval"};
  }
  const std::size_t n = last - first;
  std::vector<double> t_sec(n);
  for (std::size_t i = 0; i < n; ++i) {
    t_sec[i] = static_cast<double>(times[first + i]) / kMsPerSecond;
  }
  std::vector<double> rate(n - 1);
  kernels::active().rates(rate.data(), seq.values().data() + first, t_sec.data(), n);
  const auto stats = kernels::active().abs_over(rate.data(), n - 1,
                                                spec.max_rate, spec.max_rate);
  if (stats.count == 0) return {};
  // A violating rate at index i involves the sample pair (i, i+1).
  TimeInterval observed{times[first + stats.first], times[first + stats.last + 1]};
  return {make_feature(c, make_degree(c, stats), observed), std::nullopt};
}

EvalOutcome eval_variance(const Constraint& c, const VarianceSpec& spec,
                          const SeriesBundle& bundle,
                          const TimeInterval& interval) {
  const Sequence& seq = require_sensor(bundle, c.domain[0], c.id);
  const std::size_t w = spec.window_len;
  if (seq.size() < w) {
    return {std::nullopt,
            "constraint '" + c.id + "': sequence shorter than window_len"};
  }
  const auto times = seq.times();
  const double* x = seq.values().data();
  kernels::ScanStats stats;
  std::size_t first_start = kernels::kNone;
  std::size_t last_start = kernels::kNone;
  // Tumbling windows anchored at absolute sample index so that enlarging the
  // analysis interval only adds windows.
  for (std::size_t start = 0; start + w <= seq.size(); start += w) {
    if (times[start] < interval.lo || times[start + w - 1] > interval.hi) continue;
    const double sum = kernels::active().sum(x + start, w);
    const double sumsq = kernels::active().dot(x + start, x + start, w);
    const double dw = static_cast<double>(w);
    const double var = (sumsq - sum * sum / dw) / dw;
    if (var > spec.max_var) {
      const double metric = (var - spec.max_var) /
                            (spec.max_var > 0 ? spec.max_var : 1.0);
      stats.merge_point(start, metric);
      if (first_start == kernels::kNone) first_start = start;
      last_start = start;
    }
  }
  if (stats.count == 0) return {};
  TimeInterval observed{times[first_start], times[last_start + w - 1]};
  return {make_feature(c, make_degree(c, stats), observed), std::nullopt};
}

EvalOutcome eval_mechanism(const Constraint& c, const MechanismSpec& spec,
                           const SeriesBundle& bundle,
                           const TimeInterval& interval) {
  std::vector<const Sequence*> seqs;
  seqs.reserve(c.domain.size());
  for (const std::string& id : c.domain) {
    seqs.push_back(&require_sensor(bundle, id, c.id));
  }
  AlignedView view = align_intersection(seqs);
  auto [first, last] = range_in(view.times, interval);
  if (first >= last) {
    return {std::nullopt,
            "constraint '" + c.id + "': no shared timestamps in interval"};
  }
  const std::size_t n = last - first;
  std::vector<double> residual(n, spec.offset);
  for (std::size_t k = 0; k < seqs.size(); ++k) {
    kernels::active().axpy(residual.data(), view.values[k].data() + first,
                           spec.coeffs[k], n);
  }
  const double denom = spec.tolerance > 0 ? spec.tolerance : 1.0;
  const auto stats = kernels::active().abs_over(residual.data(), n,
                                                spec.tolerance, denom);
  if (stats.count == 0) return {};
  TimeInterval observed{view.times[first + stats.first],
                        view.times[first + stats.last]};
  return {make_feature(c, make_degree(c, stats), observed), std::nullopt};
}

EvalOutcome eval_similarity(const Constraint& c, const SimilaritySpec& spec,
                            const SeriesBundle& bundle,
                            const TimeInterval& interval) {
  const Sequence& sa = require_sensor(bundle, c.domain[0], c.id);
  const Sequence& sb = require_sensor(bundle, c.domain[1], c.id);
  AlignedView view = align_intersection({&sa, &sb});
  const std::size_t w = spec.window_len;
  if (view.times.size() < w) {
    return {std::nullopt,
            "constraint '" + c.id + "': fewer shared samples than window_len"};
  }
  const double* x = view.values[0].data();
  const double* y = view.values[1].data();
  kernels::ScanStats stats;
  std::size_t first_start = kernels::kNone;
  std::size_t last_start = kernels::kNone;
  for (std::size_t start = 0; start + w <= view.times.size(); start += w) {
    if (view.times[start] < interval.lo || view.times[start + w - 1] > interval.hi) {
      continue;
    }
    const double dw = static_cast<double>(w);
    const double sx = kernels::active().sum(x + start, w);
    const double sy = kernels::active().sum(y + start, w);
    const double sxx = kernels::active().dot(x + start, x + start, w);
    const double syy = kernels::active().dot(y + start, y + start, w);
    const double sxy = kernels::active().dot(x + start, y + start, w);
    const double vx = sxx - sx * sx / dw;
    const double vy = syy - sy * sy / dw;
    if (vx <= 0.0 || vy <= 0.0) continue;  // flat window, correlation undefined
    const double corr = (sxy - sx * sy / dw) / std::sqrt(vx * vy);
    if (corr < spec.min_corr) {
      const double metric =
          (spec.min_corr - corr) / (1.0 + std::fabs(spec.min_corr));
      stats.merge_point(start, metric);
      if (first_start == kernels::kNone) first_start = start;
      last_start = start;
    }
  }
  if (stats.count == 0) return {};
  TimeInterval observed{view.times[first_start], view.times[last_start + w - 1]};
  return {make_feature(c, make_degree(c, stats), observed), std::nullopt};
}

}  // namespace

EvalOutcome evaluate_constraint(const Constraint& constraint,
                                const SeriesBundle& bundle,
                                const TimeInterval& interval) {
  struct Eval {
    const Constraint& c;
    const SeriesBundle& bundle;
    const TimeInterval& interval;
    EvalOutcome operator()(const ValueDomainSpec& s) const {
      return eval_value_domain(c, s, bundle, interval);
    }
    EvalOutcome operator()(const MechanismSpec& s) const {
      return eval_mechanism(c, s, bundle, interval);
    }
    EvalOutcome operator()(const SpeedSpec& s) const {
      return eval_speed(c, s, bundle, interval);
    }
    EvalOutcome operator()(const VarianceSpec& s) const {
      return eval_variance(c, s, bundle, interval);
    }
    EvalOutcome operator()(const SimilaritySpec& s) const {
      return eval_similarity(c, s, bundle, interval);
    }
  };
  return std::visit(Eval{constraint, bundle, interval}, constraint.check);
}

DetectionReport detect_violations(const ConstraintCatalog& catalog,
                                  const SeriesBundle& bundle,
                                  const TimeInterval& interval,
                                  const DetectOptions& options) {
  const std::size_t n = catalog.size();
  std::vector<EvalOutcome> outcomes(n);
  std::vector<std::string> errors(n);

  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Constraint& c = catalog.constraints()[i];
      try {
        outcomes[i] = evaluate_constraint(c, bundle, interval);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
  };

  const unsigned threads = std::max(1u, options.threads);
  if (threads == 1 || n < 2) {
    worker(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = std::min<std::size_t>(t * chunk, n);
      const std::size_t end = std::min<std::size_t>(begin + chunk, n);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  DetectionReport report;
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      report.notes.push_back(errors[i]);
      continue;
    }
    if (outcomes[i].note) report.notes.push_back(*outcomes[i].note);
    if (!outcomes[i].feature) continue;
    ViolationFeature& f = *outcomes[i].feature;
    if (options.split_multi_sequence && f.sequences.size() > 1) {
      for (const std::string& sensor : f.sequences) {
        ViolationFeature split = f;
        split.sequences = {sensor};
        report.features.push_back(std::move(split));
      }
    } else {
      report.features.push_back(std::move(f));
    }
  }
  std::sort(report.features.begin(), report.features.end(),
            [](const ViolationFeature& a, const ViolationFeature& b) {
              if (a.constraint_id != b.constraint_id) {
                return a.constraint_id < b.constraint_id;
              }
              return a.sequences < b.sequences;
            });
  return report;
}

DetectionReport detect_violations(const ConstraintCatalog& catalog,
                                  const SeriesBundle& bundle,
                                  const DetectOptions& options) {
  auto extent = bundle.extent();
  if (!extent) return {};
  return detect_violations(catalog, bundle, *extent, options);
}

std::string features_to_json(const std::vector<ViolationFeature>& features,
                             int indent) {
  json doc = json::array();
  for (const ViolationFeature& f : features) {
    json item = {
        {"constraint_id", f.constraint_id},
        {"sequences", f.sequences},
        {"interval", {f.interval.lo, f.interval.hi}},
        {"K", f.involved()},
    };
    if (f.degree.quantitative) {
      item["F"] = {f.degree.lo, f.degree.hi};
    } else {
      item["F"] = true;
    }
    doc.push_back(std::move(item));
  }
  return doc.dump(indent);
}

std::vector<ViolationFeature> features_from_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchemaError, std::string("violation report: ") + e.what());
  }
  if (!doc.is_array()) {
    throw Error(ErrorKind::kSchemaError, "violation report must be a JSON array");
  }
  std::vector<ViolationFeature> features;
  for (const json& item : doc) {
    try {
      ViolationFeature f;
      f.constraint_id = item.at("constraint_id").get<std::string>();
      f.sequences = item.at("sequences").get<std::vector<std::string>>();
      std::sort(f.sequences.begin(), f.sequences.end());
      const json& deg = item.at("F");
      if (deg.is_boolean()) {
        f.degree = Degree::boolean();
      } else if (deg.is_array() && deg.size() == 2) {
        f.degree = Degree::interval(deg[0].get<double>(), deg[1].get<double>());
      } else {
        throw Error(ErrorKind::kSchemaError, "feature F must be true or [d, u]");
      }
      const json& iv = item.at("interval");
      f.interval = {iv[0].get<Timestamp>(), iv[1].get<Timestamp>()};
      features.push_back(std::move(f));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kSchemaError,
                  std::string("violation report entry: ") + e.what());
    }
  }
  return features;
}

}  // namespace aexplain
