// Copyright 2026 The Exposure ABM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal CSV handling for the engine's own flat schemas (no quoting, comma
// separated, first row is a header).

#ifndef EXPOSURE_ABM_CSV_HPP_
#define EXPOSURE_ABM_CSV_HPP_

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "exposure_abm/error.hpp"

namespace exposure_abm::csv {

inline std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> SplitRow(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    const std::string_view field =
        line.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                         : pos - start);
    out.emplace_back(Trim(field));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Row {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;
};

struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<Row> rows;

  std::optional<std::size_t> Column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }

  std::size_t RequireColumn(std::string_view name) const {
    auto col = Column(name);
    if (!col)
      Fail(ErrorKind::kParse, source + ": missing column '" + std::string(name) + "'");
    return *col;
  }
};

inline Table ParseText(std::string_view text, std::string source) {
  Table table;
  table.source = std::move(source);
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool have_header = false;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = Trim(text.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    auto fields = SplitRow(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != table.header.size())
        Fail(ErrorKind::kParse, table.source + ":" + std::to_string(line_no) +
                                    ": expected " + std::to_string(table.header.size()) +
                                    " fields, got " + std::to_string(fields.size()));
      table.rows.push_back({line_no, std::move(fields)});
    }
    if (end == text.size()) break;
  }
  if (!have_header) Fail(ErrorKind::kParse, table.source + ": empty file");
  return table;
}

inline std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kParse, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Table ReadFileTable(const std::filesystem::path& path) {
  return ParseText(ReadFile(path), path.string());
}

inline double ParseDouble(std::string_view s, std::string_view where) {
  double value = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || s.empty())
    Fail(ErrorKind::kParse, std::string(where) + ": not a number: '" + std::string(s) + "'");
  return value;
}

inline std::int64_t ParseInt(std::string_view s, std::string_view where) {
  std::int64_t value = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || s.empty())
    Fail(ErrorKind::kParse,
         std::string(where) + ": not an integer: '" + std::string(s) + "'");
  return value;
}

inline std::string Where(const Table& t, const Row& r) {
  return t.source + ":" + std::to_string(r.line);
}

// Shortest text that reads back to the same double.
inline std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Fixed number of significant digits, for human-facing columns.
inline std::string FormatDouble(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

inline void WriteFile(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorKind::kRuntime, "cannot write " + path.string());
  out << content;
  if (!out) Fail(ErrorKind::kRuntime, "write failed: " + path.string());
}

}  // namespace exposure_abm::csv

#endif  // EXPOSURE_ABM_CSV_HPP_
