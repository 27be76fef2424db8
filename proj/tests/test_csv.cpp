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

#include "aexplain/csv.hpp"

#include <doctest.h>

#include <sstream>

#include "aexplain/errors.hpp"

using namespace aexplain;

namespace {

SeriesBundle parse(const std::string& text) {
  std::istringstream in(text);
  return parse_series(in);
}

ErrorKind kind_of(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kUsageError;
}

}  // namespace

TEST_CASE("well-formed CSV gives M=2, N=5") {
  auto bundle = parse(
      "timestamp,S1,S2\n"
      "0,1.5,10\n60000,2.5,20\n120000,3.5,30\n180000,4.5,40\n240000,5.5,50\n");
  CHECK(bundle.dimension() == 2);
  CHECK(bundle.find("S1")->size() == 5);
  CHECK(bundle.find("S2")->values()[4] == 50.0);
}

TEST_CASE("duplicate timestamp is NonMonotonicTime") {
  CHECK(kind_of("timestamp,S1\n0,1\n0,2\n") == ErrorKind::kNonMonotonicTime);
  CHECK(kind_of("timestamp,S1\n100,1\n50,2\n") == ErrorKind::kNonMonotonicTime);
}

TEST_CASE("NaN cell is MalformedRow") {
  CHECK(kind_of("timestamp,S1\n0,1\n60000,NaN\n") == ErrorKind::kMalformedRow);
  CHECK(kind_of("timestamp,S1\n0,1\n60000,inf\n") == ErrorKind::kMalformedRow);
}

TEST_CASE("empty input and missing data rows") {
  CHECK(kind_of("") == ErrorKind::kEmptyInput);
  CHECK(kind_of("timestamp,S1\n") == ErrorKind::kEmptyInput);
}

TEST_CASE("empty cells mean absent readings") {
  auto bundle = parse("timestamp,S1,S2\n0,1,\n60000,,20\n");
  CHECK(bundle.find("S1")->size() == 1);
  CHECK(bundle.find("S2")->size() == 1);
  CHECK(bundle.time_axis().size() == 2);
}

TEST_CASE("ISO-8601 timestamps are detected and converted") {
  auto bundle = parse(
      "timestamp,S1\n"
      "2024-01-01T00:00:00Z,1\n"
      "2024-01-01T00:01:00Z,2\n");
  CHECK(bundle.find("S1")->times()[0] == 1704067200000LL);
  CHECK(bundle.find("S1")->times()[1] == 1704067260000LL);

  Timestamp ms = 0;
  CHECK(parse_iso8601("2024-01-01T00:00:00.250Z", &ms));
  CHECK(ms == 1704067200250LL);
  CHECK_FALSE(parse_iso8601("not-a-time", &ms));
}

TEST_CASE("mixed timestamp formats are rejected") {
  CHECK(kind_of("timestamp,S1\n2024-01-01T00:00:00Z,1\n60000,2\n") ==
        ErrorKind::kMalformedRow);
  CHECK(kind_of("timestamp,S1\n0,1\n2024-01-01T00:00:00Z,2\n") ==
        ErrorKind::kMalformedRow);
}

TEST_CASE("the column-to-sensor schema renames header columns") {
  CsvOptions options;
  options.equipment_id = "unit7";
  options.column_to_sensor = {{"temp_raw", "S1"}, {"pressure", "S2"}};
  std::istringstream in("timestamp,temp_raw,pressure\n0,1,2\n60000,3,4\n");
  auto bundle = parse_series(in, options);
  CHECK(bundle.equipment_id() == "unit7");
  CHECK(bundle.find("S1") != nullptr);
  CHECK(bundle.find("S2") != nullptr);
  CHECK(bundle.find("temp_raw") == nullptr);
}

TEST_CASE("RFC-4180 quoting round-trips") {
  auto bundle = parse("timestamp,\"pressure, abs\"\n0,1.25\n60000,2\n");
  REQUIRE(bundle.find("pressure, abs") != nullptr);
  const std::string text = serialize_series(bundle);
  CHECK(text.find("\"pressure, abs\"") != std::string::npos);
  std::istringstream in(text);
  CHECK(parse_series(in) == bundle);
}

TEST_CASE("parse then serialize preserves every value and timestamp") {
  const std::string text =
      "timestamp,S1,S2\n"
      "0,1.25,-3.5\n"
      "60000,0.1,\n"
      "120000,,7.25e-3\n";
  auto bundle = parse(text);
  auto reparsed = parse(serialize_series(bundle));
  CHECK(reparsed == bundle);

  // Canonically-formatted output is a fixed point.
  const std::string canonical = serialize_series(bundle);
  CHECK(serialize_series(parse(canonical)) == canonical);
}
