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

// Drives the installed binary end to end over files produced by the fixture
// generator.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "aexplain/csv.hpp"
#include "aexplain/harness.hpp"
#include "aexplain/knowledge.hpp"

using namespace aexplain;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(AEXPLAIN_CLI_PATH) + " " + args +
                          " > /dev/null 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct CliFixture {
  fs::path dir;

  CliFixture() {
    dir = fs::temp_directory_path() / "aexplain_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    WorldSpec spec;
    spec.sensors = 16;
    spec.points = 2400;
    spec.knowledge_events = 10;
    spec.seed = 5;
    auto world = build_world(spec);
    auto clean = generate_clean(world, 2400, 7);
    write_series_file(clean, (dir / "clean.csv").string());
    std::ofstream catalog(dir / "catalog.json");
    catalog << catalog_to_json(world.catalog);
    write_knowledge_file(world.knowledge, (dir / "knowledge.json").string());
    auto degraded = degrade_knowledge(world.knowledge, 40.0, 7);
    write_knowledge_file(degraded, (dir / "degraded.json").string());
  }

  std::string arg(const char* name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("the CLI pipeline runs end to end") {
  CliFixture fx;

  CHECK(run_cli("validate --data " + fx.arg("clean.csv") + " --catalog " +
                fx.arg("catalog.json") + " --knowledge " +
                fx.arg("knowledge.json")) == 0);

  // Inject labeled anomalies into the clean fixture.
  REQUIRE(run_cli("inject --data " + fx.arg("clean.csv") + " --catalog " +
                  fx.arg("catalog.json") + " --knowledge " +
                  fx.arg("knowledge.json") + " --events 3 --seed 5 --out " +
                  fx.dir.string()) == 0);
  CHECK(fs::exists(fx.dir / "dirty.csv"));
  CHECK(fs::exists(fx.dir / "labels.json"));
  CHECK(fs::exists(fx.dir / "plan.json"));

  // Detection produces a violation report.
  REQUIRE(run_cli("detect --data " + fx.arg("dirty.csv") + " --catalog " +
                  fx.arg("catalog.json") + " --out " + fx.dir.string()) == 0);
  const std::string violations = slurp(fx.dir / "violations.json");
  CHECK(violations.find("constraint_id") != std::string::npos);

  // Explanation runs detect internally or consumes the report.
  const fs::path out_a = fx.dir / "a";
  const fs::path out_b = fx.dir / "b";
  REQUIRE(run_cli("explain --data " + fx.arg("dirty.csv") + " --catalog " +
                  fx.arg("catalog.json") + " --knowledge " +
                  fx.arg("knowledge.json") + " --out " + out_a.string()) == 0);
  REQUIRE(run_cli("explain --report " + (fx.dir / "violations.json").string() +
                  " --catalog " + fx.arg("catalog.json") + " --knowledge " +
                  fx.arg("knowledge.json") + " --out " + out_b.string()) == 0);
  const std::string report_a = slurp(out_a / "explanation.json");
  CHECK(report_a.find("\"solution\"") != std::string::npos);
  CHECK(report_a.find("\"set_b\"") != std::string::npos);
  CHECK(report_a.find("\"set_c\"") != std::string::npos);

  SUBCASE("identical inputs give byte-identical reports") {
    const fs::path out_c = fx.dir / "c";
    REQUIRE(run_cli("explain --data " + fx.arg("dirty.csv") + " --catalog " +
                    fx.arg("catalog.json") + " --knowledge " +
                    fx.arg("knowledge.json") + " --out " + out_c.string()) == 0);
    CHECK(slurp(out_c / "explanation.json") == report_a);
  }

  SUBCASE("update proposes against degraded knowledge and applies") {
    REQUIRE(run_cli("update --data " + fx.arg("dirty.csv") + " --catalog " +
                    fx.arg("catalog.json") + " --knowledge " +
                    fx.arg("degraded.json") + " --auto-accept --out " +
                    fx.dir.string()) == 0);
    CHECK(fs::exists(fx.dir / "proposals.json"));
    if (fs::exists(fx.dir / "knowledge_updated.json")) {
      const std::string updated = slurp(fx.dir / "knowledge_updated.json");
      CHECK(updated.find("\"version\"") != std::string::npos);
    }
    // Re-apply from the proposal file path.
    CHECK(run_cli("update --proposals " + (fx.dir / "proposals.json").string() +
                  " --knowledge " + fx.arg("degraded.json") +
                  " --apply accepted --out " + (fx.dir / "apply").string()) == 0);
  }

  SUBCASE("a tiny evaluate grid writes result tables") {
    REQUIRE(run_cli("evaluate --sensors 16 --knowledge-events 10 "
                    "--constraints 0 --points 1200 --ae 3 --methods AEC "
                    "--seeds 1 --seed 3 --out " +
                    (fx.dir / "eval").string()) == 0);
    const std::string csv = slurp(fx.dir / "eval" / "results.csv");
    CHECK(csv.find("method,constraints,points,ae,inr,seed") == 0);
    CHECK(fs::exists(fx.dir / "eval" / "results.json"));
  }

  SUBCASE("usage errors exit with code 2") {
    CHECK(run_cli("explain --data " + fx.arg("dirty.csv") + " --catalog " +
                  fx.arg("catalog.json") + " --knowledge " +
                  fx.arg("knowledge.json") + " --theta 1.5") == 2);
    CHECK(run_cli("no-such-command") == 2);
  }

  SUBCASE("domain errors exit with code 1") {
    CHECK(run_cli("detect --data " + fx.arg("missing.csv") + " --catalog " +
                  fx.arg("catalog.json")) == 1);
  }
}
