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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "aexplain/errors.hpp"

namespace aexplain {
namespace {

// One RFC-4180 record; quoted fields may contain commas, CRLF and doubled
// quotes. Returns false at end of stream with no data consumed.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool saw_any = false;
  int ch;
  while ((ch = in.get()) != EOF) {
    saw_any = true;
    char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        break;
      case '\r':
        if (in.peek() == '\n') in.get();
        [[fallthrough]];
      case '\n':
        fields.push_back(std::move(field));
        return true;
      default:
        field.push_back(c);
    }
  }
  if (!saw_any) return false;
  fields.push_back(std::move(field));
  return true;
}

bool parse_int64(const std::string& text, std::int64_t* out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, *out);
  return ec == std::errc() && ptr == last;
}

bool parse_double(const std::string& text, double* out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, *out);
  return ec == std::errc() && ptr == last;
}

// Howard Hinnant's days-from-civil.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

enum class TimeFormat { kUnknown, kEpochMillis, kIso8601 };

}  // namespace

bool parse_iso8601(const std::string& text, Timestamp* out_ms) {
  // YYYY-MM-DD[T ]HH:MM:SS[.fff][Z]
  int y, mo, d, h, mi, s;
  int n = 0;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2d%*1[T ]%2d:%2d:%2d%n", &y, &mo, &d,
                  &h, &mi, &s, &n) != 6) {
    return false;
  }
  std::size_t pos = static_cast<std::size_t>(n);
  long millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    std::size_t digits = pos - start;
    if (digits == 0 || digits > 3) return false;
    millis = std::stol(text.substr(start, digits));
    for (std::size_t k = digits; k < 3; ++k) millis *= 10;
  }
  if (pos < text.size() && text[pos] == 'Z') ++pos;
  if (pos != text.size()) return false;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) return false;
  const std::int64_t days = days_from_civil(y, mo, d);
  *out_ms = ((days * 24 + h) * 60 + mi) * 60000LL + s * 1000LL + millis;
  return true;
}

SeriesBundle parse_series(std::istream& in, const CsvOptions& options) {
  std::vector<std::string> fields;
  if (!read_record(in, fields)) {
    throw Error(ErrorKind::kEmptyInput, "no CSV header");
  }
  if (fields.empty() || fields[0] != "timestamp") {
    throw Error(ErrorKind::kSchemaError, "first CSV column must be 'timestamp'");
  }
  if (fields.size() < 2) {
    throw Error(ErrorKind::kSchemaError, "CSV needs at least one sensor column");
  }
  std::vector<std::string> sensor_ids(fields.begin() + 1, fields.end());
  for (std::string& id : sensor_ids) {
    auto it = options.column_to_sensor.find(id);
    if (it != options.column_to_sensor.end()) id = it->second;
  }

  const std::size_t m = sensor_ids.size();
  std::vector<std::vector<Timestamp>> times(m);
  std::vector<std::vector<double>> values(m);

  TimeFormat format = TimeFormat::kUnknown;
  Timestamp prev_t = 0;
  bool have_prev = false;
  std::size_t row = 0;  // 1-based data row index
  std::size_t data_rows = 0;

  while (read_record(in, fields)) {
    ++row;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != m + 1) {
      throw Error(ErrorKind::kMalformedRow,
                  "row " + std::to_string(row) + ": expected " +
                      std::to_string(m + 1) + " fields, got " +
                      std::to_string(fields.size()));
    }
    ++data_rows;

    Timestamp t = 0;
    std::int64_t as_int = 0;
    const bool is_int = parse_int64(fields[0], &as_int);
    if (format == TimeFormat::kUnknown) {
      format = is_int ? TimeFormat::kEpochMillis : TimeFormat::kIso8601;
    }
    if (format == TimeFormat::kEpochMillis) {
      if (!is_int) {
        throw Error(ErrorKind::kMalformedRow,
                    "row " + std::to_string(row) +
                        ": timestamp format changed mid-file or is invalid: '" +
                        fields[0] + "'");
      }
      t = as_int;
    } else {
      if (is_int || !parse_iso8601(fields[0], &t)) {
        throw Error(ErrorKind::kMalformedRow,
                    "row " + std::to_string(row) + ": bad ISO-8601 timestamp '" +
                        fields[0] + "'");
      }
    }
    if (have_prev && t <= prev_t) {
      throw Error(ErrorKind::kNonMonotonicTime,
                  "row " + std::to_string(row) + ": timestamp " +
                      std::to_string(t) +
                      (t == prev_t ? " duplicates" : " decreases from") + " " +
                      std::to_string(prev_t));
    }
    prev_t = t;
    have_prev = true;

    for (std::size_t c = 0; c < m; ++c) {
      const std::string& cell = fields[c + 1];
      if (cell.empty()) continue;  // absent reading
      double v;
      if (!parse_double(cell, &v) || !std::isfinite(v)) {
        throw Error(ErrorKind::kMalformedRow,
                    "row " + std::to_string(row) + ": column '" +
                        sensor_ids[c] + "': not a finite number: '" + cell + "'");
      }
      times[c].push_back(t);
      values[c].push_back(v);
    }
  }
  if (data_rows == 0) {
    throw Error(ErrorKind::kEmptyInput, "CSV has a header but no data rows");
  }

  std::vector<Sequence> sequences;
  sequences.reserve(m);
  for (std::size_t c = 0; c < m; ++c) {
    sequences.emplace_back(sensor_ids[c], std::move(times[c]), std::move(values[c]));
  }
  return SeriesBundle(options.equipment_id, std::move(sequences));
}

SeriesBundle parse_series_file(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path);
  return parse_series(in, options);
}

void serialize_series(const SeriesBundle& bundle, std::ostream& out) {
  out << "timestamp";
  for (const Sequence& s : bundle.sequences()) {
    out << ',' << quote_if_needed(s.sensor_id());
  }
  out << '\n';

  const std::size_t m = bundle.dimension();
  std::vector<std::size_t> cursor(m, 0);
  for (Timestamp t : bundle.time_axis()) {
    out << t;
    for (std::size_t c = 0; c < m; ++c) {
      const Sequence& s = bundle.sequences()[c];
      out << ',';
      if (cursor[c] < s.size() && s.times()[cursor[c]] == t) {
        out << format_double(s.values()[cursor[c]]);
        ++cursor[c];
      }
    }
    out << '\n';
  }
}

std::string serialize_series(const SeriesBundle& bundle) {
  std::ostringstream out;
  serialize_series(bundle, out);
  return out.str();
}

void write_series_file(const SeriesBundle& bundle, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot open " + path + " for writing");
  serialize_series(bundle, out);
}

}  // namespace aexplain
