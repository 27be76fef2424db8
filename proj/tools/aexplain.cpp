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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "aexplain/csv.hpp"
#include "aexplain/detect.hpp"
#include "aexplain/errors.hpp"
#include "aexplain/explain.hpp"
#include "aexplain/harness.hpp"
#include "aexplain/knowledge.hpp"
#include "aexplain/update.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
  std::string data;
  std::string catalog;
  std::string knowledge;
  std::string report;
  std::string plan;
  std::string proposals;
  std::string out = ".";
  std::string method = "AEC";
  std::string apply = "accepted";
  double theta = 0.9;
  double lambda = 0.4;
  double w0 = 0.5;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool split = false;
  bool auto_accept = false;
  bool near_boundary = false;
  bool print_config = false;
  // evaluate grid
  std::vector<std::size_t> grid_constraints = {210};
  std::vector<std::size_t> grid_points = {10800};
  std::vector<std::size_t> grid_ae = {20};
  std::vector<double> grid_inr = {0.0};
  std::vector<std::string> grid_methods = {"AEC"};
  std::size_t sensors = 64;
  std::size_t knowledge_events = 60;
  std::size_t seeds = 1;
  std::size_t inject_events = 20;
};

json config_to_json(const RunConfig& c) {
  return {{"data", c.data},
          {"catalog", c.catalog},
          {"knowledge", c.knowledge},
          {"out", c.out},
          {"method", c.method},
          {"theta", c.theta},
          {"lambda", c.lambda},
          {"w0", c.w0},
          {"seed", c.seed},
          {"threads", c.threads},
          {"split", c.split},
          {"auto_accept", c.auto_accept},
          {"near_boundary", c.near_boundary}};
}

void apply_config_file(const std::string& path, CLI::App& app) {
  std::ifstream in(path);
  if (!in) {
    throw aexplain::Error(aexplain::ErrorKind::kIoError,
                          "cannot open config " + path);
  }
  json doc = json::parse(in, nullptr, true, true);
  for (auto& [key, value] : doc.items()) {
    CLI::Option* opt = app.get_option_no_throw("--" + key);
    if (opt == nullptr || opt->count() > 0) continue;  // flags win
    std::ostringstream text;
    if (value.is_string()) {
      text << value.get<std::string>();
    } else {
      text << value.dump();
    }
    opt->add_result(text.str());
    opt->run_callback();
  }
}

void check_unit_interval(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    throw CLI::ValidationError(std::string(name) + " must lie in (0,1)");
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw aexplain::Error(aexplain::ErrorKind::kIoError,
                          "cannot write " + path.string());
  }
  out << content;
  if (!content.empty() && content.back() != '\n') out << '\n';
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw aexplain::Error(aexplain::ErrorKind::kIoError, "cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

aexplain::TimeInterval parse_interval_arg(const std::string& text,
                                          const aexplain::SeriesBundle& bundle) {
  auto extent = bundle.extent();
  if (!extent) {
    throw aexplain::Error(aexplain::ErrorKind::kEmptyInput, "bundle has no samples");
  }
  if (text.empty()) return *extent;
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw CLI::ValidationError("--interval expects <from>:<to>");
  }
  aexplain::TimeInterval iv = *extent;
  const std::string lo = text.substr(0, colon);
  const std::string hi = text.substr(colon + 1);
  if (!lo.empty()) iv.lo = std::stoll(lo);
  if (!hi.empty()) iv.hi = std::stoll(hi);
  if (iv.lo > iv.hi) throw CLI::ValidationError("--interval from > to");
  return iv;
}

int run(int argc, char** argv) {
  RunConfig cfg;
  std::string config_path;

  CLI::App app{"Constraint-violation detection and set-cover anomaly "
               "explanation for multivariate industrial time series"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  app.add_option("--config", config_path, "JSON config file (flags override)");
  app.add_flag("--print-config", cfg.print_config,
               "print the effective configuration and exit");

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", cfg.out, "output directory");
    cmd->add_option("--theta", cfg.theta, "consistency threshold in (0,1)");
    cmd->add_option("--lambda", cfg.lambda, "AE baseline threshold in (0,1)");
    cmd->add_option("--w0", cfg.w0, "initial weight for learnt representations");
    cmd->add_option("--seed", cfg.seed, "random seed");
    cmd->add_option("--threads", cfg.threads, "worker threads")
        ->envname("AEXPLAIN_THREADS");
  };

  CLI::App* detect = app.add_subcommand("detect", "run violation detection");
  detect->add_option("--data", cfg.data, "input CSV")->required();
  detect->add_option("--catalog", cfg.catalog, "constraint catalog JSON")->required();
  std::string interval_text;
  detect->add_option("--interval", interval_text, "analysis interval <from>:<to> (epoch ms)");
  detect->add_flag("--split", cfg.split,
                   "one feature per involved sequence for multi-sequence violations");
  add_common(detect);

  CLI::App* explain = app.add_subcommand("explain", "detect and explain anomalies");
  explain->add_option("--data", cfg.data, "input CSV");
  explain->add_option("--report", cfg.report, "existing violation report JSON");
  explain->add_option("--catalog", cfg.catalog, "constraint catalog JSON")->required();
  explain->add_option("--knowledge", cfg.knowledge, "knowledge set JSON")->required();
  explain->add_option("--method", cfg.method,
                      "AEC | greedyC | greedynC | MFnC | TopK | AE");
  add_common(explain);

  CLI::App* update = app.add_subcommand("update", "learn from unexplained violations");
  update->add_option("--data", cfg.data, "input CSV");
  update->add_option("--catalog", cfg.catalog, "constraint catalog JSON");
  update->add_option("--knowledge", cfg.knowledge, "knowledge set JSON")->required();
  update->add_option("--proposals", cfg.proposals, "apply an existing proposal file");
  update->add_option("--apply", cfg.apply, "status to apply (accepted)");
  update->add_flag("--auto-accept", cfg.auto_accept, "apply proposals immediately");
  add_common(update);

  CLI::App* inject = app.add_subcommand("inject", "inject labeled anomalies");
  inject->add_option("--data", cfg.data, "clean input CSV")->required();
  inject->add_option("--catalog", cfg.catalog, "constraint catalog JSON")->required();
  inject->add_option("--knowledge", cfg.knowledge, "knowledge set JSON")->required();
  inject->add_option("--plan", cfg.plan, "injection plan JSON (generated when absent)");
  inject->add_option("--events", cfg.inject_events, "events to sample for a generated plan");
  inject->add_flag("--near-boundary", cfg.near_boundary,
                   "aim metrics near the top of knowledge bands");
  add_common(inject);

  CLI::App* evaluate = app.add_subcommand("evaluate", "run the experiment grid");
  evaluate->add_option("--constraints", cfg.grid_constraints, "catalog sizes");
  evaluate->add_option("--points", cfg.grid_points, "time-point counts");
  evaluate->add_option("--ae", cfg.grid_ae, "injected event counts");
  evaluate->add_option("--inr", cfg.grid_inr, "incompleteness percentages");
  evaluate->add_option("--methods", cfg.grid_methods,
                       "AEC greedyC greedynC MFnC TopK AE rRemove Update");
  evaluate->add_option("--sensors", cfg.sensors, "sensor count");
  evaluate->add_option("--knowledge-events", cfg.knowledge_events, "knowledge size");
  evaluate->add_option("--seeds", cfg.seeds, "seeds per cell");
  add_common(evaluate);

  CLI::App* validate = app.add_subcommand("validate", "validate input files");
  validate->add_option("--data", cfg.data, "input CSV");
  validate->add_option("--catalog", cfg.catalog, "constraint catalog JSON");
  validate->add_option("--knowledge", cfg.knowledge, "knowledge set JSON");
  add_common(validate);

  try {
    app.parse(argc, argv);
    if (!config_path.empty()) apply_config_file(config_path, app);
    check_unit_interval(cfg.theta, "--theta");
    check_unit_interval(cfg.lambda, "--lambda");
    check_unit_interval(cfg.w0, "--w0");
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  if (cfg.print_config) {
    std::cout << config_to_json(cfg).dump(2) << "\n";
    return 0;
  }

  fs::create_directories(cfg.out);
  aexplain::MatchConfig match;
  match.theta = cfg.theta;

  if (detect->parsed()) {
    auto bundle = aexplain::parse_series_file(cfg.data);
    auto catalog = aexplain::load_catalog_file(cfg.catalog);
    const auto interval = parse_interval_arg(interval_text, bundle);
    aexplain::DetectOptions opt;
    opt.split_multi_sequence = cfg.split;
    opt.threads = cfg.threads;
    auto report = aexplain::detect_violations(catalog, bundle, interval, opt);
    for (const std::string& note : report.notes) std::cerr << note << "\n";
    write_file(fs::path(cfg.out) / "violations.json",
               aexplain::features_to_json(report.features));
    std::cout << report.features.size() << " violation feature(s) -> "
              << (fs::path(cfg.out) / "violations.json").string() << "\n";
    return 0;
  }

  if (explain->parsed()) {
    auto catalog = aexplain::load_catalog_file(cfg.catalog);
    auto ks = aexplain::load_knowledge_file(cfg.knowledge);
    std::vector<aexplain::ViolationFeature> features;
    const bool split = cfg.method == "greedynC" || cfg.method == "MFnC";
    if (!cfg.report.empty()) {
      features = aexplain::features_from_json(read_file(cfg.report));
    } else if (!cfg.data.empty()) {
      auto bundle = aexplain::parse_series_file(cfg.data);
      aexplain::DetectOptions opt;
      opt.split_multi_sequence = split;
      opt.threads = cfg.threads;
      auto report = aexplain::detect_violations(catalog, bundle, opt);
      for (const std::string& note : report.notes) std::cerr << note << "\n";
      features = std::move(report.features);
    } else {
      throw aexplain::Error(aexplain::ErrorKind::kUsageError,
                            "explain needs --data or --report");
    }
    aexplain::ExplainConfig ecfg;
    ecfg.match = match;
    ecfg.lambda = cfg.lambda;
    ecfg.method = cfg.method;
    ecfg.split_detection = split;
    auto result = aexplain::explain_features(features, ks, catalog, ecfg);
    write_file(fs::path(cfg.out) / "explanation.json",
               aexplain::explanation_report_json(result, ecfg));
    std::cout << result.solution.chosen.size() << " event(s), total cost "
              << result.solution.total_cost << " -> "
              << (fs::path(cfg.out) / "explanation.json").string() << "\n";
    return 0;
  }

  if (update->parsed()) {
    auto ks = aexplain::load_knowledge_file(cfg.knowledge);
    if (!cfg.proposals.empty()) {
      auto proposals = aexplain::proposals_from_json(read_file(cfg.proposals));
      if (cfg.apply != "accepted") {
        throw aexplain::Error(aexplain::ErrorKind::kUsageError,
                              "--apply supports only 'accepted'");
      }
      auto updated = aexplain::apply_proposals_with_weight(ks, proposals, cfg.w0);
      write_file(fs::path(cfg.out) / "knowledge_updated.json",
                 aexplain::knowledge_to_json(updated));
      std::cout << "knowledge version " << updated.version() << " -> "
                << (fs::path(cfg.out) / "knowledge_updated.json").string() << "\n";
      return 0;
    }
    if (cfg.data.empty() || cfg.catalog.empty()) {
      throw aexplain::Error(aexplain::ErrorKind::kUsageError,
                            "update needs --data and --catalog (or --proposals)");
    }
    auto catalog = aexplain::load_catalog_file(cfg.catalog);
    auto bundle = aexplain::parse_series_file(cfg.data);
    aexplain::DetectOptions opt;
    opt.threads = cfg.threads;
    auto det = aexplain::detect_violations(catalog, bundle, opt);
    aexplain::ExplainConfig ecfg;
    ecfg.match = match;
    ecfg.lambda = cfg.lambda;
    auto er = aexplain::explain_features(det.features, ks, catalog, ecfg);
    std::vector<std::size_t> uncovered = er.solution.uncovered;
    uncovered.insert(uncovered.end(), er.cover_map.inexplicable.begin(),
                     er.cover_map.inexplicable.end());
    std::sort(uncovered.begin(), uncovered.end());
    aexplain::UpdateConfig ucfg;
    ucfg.match = match;
    ucfg.initial_weight = cfg.w0;
    ucfg.auto_accept = cfg.auto_accept;
    auto ur = aexplain::explanation_update(ks, er.features, uncovered, catalog, ucfg);
    write_file(fs::path(cfg.out) / "proposals.json",
               aexplain::proposals_to_json(ur.proposals));
    std::cout << ur.proposals.size() << " proposal(s) -> "
              << (fs::path(cfg.out) / "proposals.json").string() << "\n";
    if (ur.applied) {
      write_file(fs::path(cfg.out) / "knowledge_updated.json",
                 aexplain::knowledge_to_json(ur.knowledge));
      std::cout << "knowledge version " << ur.knowledge.version() << " -> "
                << (fs::path(cfg.out) / "knowledge_updated.json").string() << "\n";
    }
    return 0;
  }

  if (inject->parsed()) {
    auto catalog = aexplain::load_catalog_file(cfg.catalog);
    auto ks = aexplain::load_knowledge_file(cfg.knowledge);
    auto bundle = aexplain::parse_series_file(cfg.data);
    aexplain::InjectionPlan plan;
    if (!cfg.plan.empty()) {
      plan = aexplain::plan_from_json(read_file(cfg.plan));
    } else {
      // Sample any knowledge events; without world metadata every event is
      // eligible.
      aexplain::SyntheticWorld pseudo;
      pseudo.catalog = catalog;
      pseudo.knowledge = ks;
      for (const auto& e : ks.events()) pseudo.injectable_events.push_back(e.event_id);
      plan = aexplain::make_plan(pseudo, bundle, cfg.inject_events, cfg.seed,
                                 cfg.near_boundary);
      write_file(fs::path(cfg.out) / "plan.json", aexplain::plan_to_json(plan));
    }
    auto injected = aexplain::inject_anomalies(bundle, plan, ks, catalog);
    for (const std::string& note : injected.notes) std::cerr << note << "\n";
    aexplain::write_series_file(injected.bundle,
                                (fs::path(cfg.out) / "dirty.csv").string());
    write_file(fs::path(cfg.out) / "labels.json",
               aexplain::labels_to_json(injected.labels));
    std::cout << injected.labels.size() << " event(s) injected -> "
              << (fs::path(cfg.out) / "dirty.csv").string() << "\n";
    return 0;
  }

  if (evaluate->parsed()) {
    aexplain::GridSpec grid;
    grid.constraints = cfg.grid_constraints;
    grid.points = cfg.grid_points;
    grid.anomaly_events = cfg.grid_ae;
    grid.inr = cfg.grid_inr;
    grid.methods = cfg.grid_methods;
    grid.sensors = cfg.sensors;
    grid.knowledge_events = cfg.knowledge_events;
    grid.seeds = cfg.seeds;
    grid.base_seed = cfg.seed;
    grid.theta = cfg.theta;
    grid.lambda = cfg.lambda;
    grid.w0 = cfg.w0;
    grid.threads = cfg.threads;
    auto rows = aexplain::run_experiment(grid);
    write_file(fs::path(cfg.out) / "results.csv", aexplain::results_to_csv(rows));
    write_file(fs::path(cfg.out) / "results.json", aexplain::results_to_json(rows));
    std::size_t failed = 0;
    for (const auto& r : rows) {
      if (r.failed) {
        ++failed;
        std::cerr << "cell failed: " << r.method << " seed " << r.seed << ": "
                  << r.error << "\n";
      }
    }
    std::cout << rows.size() - failed << "/" << rows.size() << " cells -> "
              << (fs::path(cfg.out) / "results.csv").string() << "\n";
    return failed == 0 ? 0 : 1;
  }

  if (validate->parsed()) {
    json out = json::object();
    bool ok = true;
    std::optional<aexplain::ConstraintCatalog> catalog;
    if (!cfg.catalog.empty()) {
      catalog = aexplain::load_catalog_file(cfg.catalog);
      out["catalog"] = {{"constraints", catalog->size()}, {"ok", true}};
    }
    if (!cfg.data.empty()) {
      auto bundle = aexplain::parse_series_file(cfg.data);
      auto report = aexplain::validate_series(bundle);
      json seqs = json::array();
      for (const auto& s : report.per_sequence) {
        seqs.push_back({{"sensor_id", s.sensor_id},
                        {"n", s.n},
                        {"min", s.min_value},
                        {"max", s.max_value},
                        {"monotonic_time", s.monotonic_time}});
      }
      out["data"] = {{"sequences", seqs}, {"defects", report.defects}};
      ok = ok && report.ok();
    }
    if (!cfg.knowledge.empty()) {
      auto ks = aexplain::load_knowledge_file(cfg.knowledge);
      auto report = aexplain::validate_knowledge(
          ks, catalog ? &*catalog : nullptr);
      out["knowledge"] = {{"events", ks.size()},
                          {"defects", report.defects},
                          {"warnings", report.warnings}};
      ok = ok && report.ok();
    }
    std::cout << out.dump(2) << "\n";
    return ok ? 0 : 1;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const aexplain::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == aexplain::ErrorKind::kUsageError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
