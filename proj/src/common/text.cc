// Copyright 2026 The ULK Authors
//
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

#include "ulk/common/text.h"

#include <charconv>

#include "ulk/common/error.h"

namespace ulk {

std::vector<std::string> Split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      return out;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view Trim(std::string_view text) {
  const char* ws = " \t\r\n";
  std::size_t a = text.find_first_not_of(ws);
  if (a == std::string_view::npos) return {};
  std::size_t b = text.find_last_not_of(ws);
  return text.substr(a, b - a + 1);
}

std::vector<std::string> SplitLines(std::string_view text) {
  std::vector<std::string> lines = Split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
  }
  return lines;
}

namespace {

template <typename T>
T ParseNumber(std::string_view field, std::size_t line, const char* what) {
  T v{};
  auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || p != field.data() + field.size()) {
    throw ParseError(line, "'" + std::string(field) + "' is not " + what);
  }
  return v;
}

}  // namespace

double ParseDoubleField(std::string_view field, std::size_t line) {
  return ParseNumber<double>(field, line, "a number");
}

std::int64_t ParseIntField(std::string_view field, std::size_t line) {
  return ParseNumber<std::int64_t>(field, line, "an integer");
}

std::uint64_t ParseUintField(std::string_view field, std::size_t line) {
  return ParseNumber<std::uint64_t>(field, line, "a non-negative integer");
}

std::string JoinIds(std::span<const int> ids, char sep) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += sep;
    out += std::to_string(ids[i]);
  }
  return out;
}

std::vector<int> ParseIds(std::string_view text, std::size_t line, char sep) {
  std::vector<int> out;
  text = Trim(text);
  if (text.empty()) return out;
  for (const std::string& f : Split(text, sep)) {
    out.push_back(static_cast<int>(ParseIntField(Trim(f), line)));
  }
  return out;
}

}  // namespace ulk
