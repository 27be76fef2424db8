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

#ifndef AEXPLAIN_CSV_HPP_
#define AEXPLAIN_CSV_HPP_

#include <iosfwd>
#include <map>
#include <string>

#include "aexplain/time_series.hpp"

namespace aexplain {

struct CsvOptions {
  std::string equipment_id = "Eq";
  // Optional header-column -> sensor-id renames; identity by default.
  std::map<std::string, std::string> column_to_sensor;
};

// Reads a `timestamp,<sensor_id>,...` CSV (RFC-4180 quoting) into a bundle.
// Timestamps are epoch-millisecond integers or ISO-8601; the format is
// auto-detected from the first data row and may not change mid-file. An empty
// cell means the sensor has no reading at that time. Rows with unparseable
// timestamps or non-finite values fail with MalformedRow; duplicate or
// decreasing timestamps fail with NonMonotonicTime.
SeriesBundle parse_series(std::istream& in, const CsvOptions& options = {});
SeriesBundle parse_series_file(const std::string& path,
                               const CsvOptions& options = {});

// Inverse of parse_series: epoch-millisecond timestamps, shortest
// round-trippable value formatting, empty cells for absent readings.
void serialize_series(const SeriesBundle& bundle, std::ostream& out);
std::string serialize_series(const SeriesBundle& bundle);
void write_series_file(const SeriesBundle& bundle, const std::string& path);

// Epoch milliseconds for "YYYY-MM-DD[T ]HH:MM:SS[.fff][Z]" (UTC).
// Returns false when the text does not match that shape.
bool parse_iso8601(const std::string& text, Timestamp* out_ms);

}  // namespace aexplain

#endif  // AEXPLAIN_CSV_HPP_
