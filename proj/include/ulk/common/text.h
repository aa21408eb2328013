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

#ifndef ULK_COMMON_TEXT_H_
#define ULK_COMMON_TEXT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ulk {

// Splits on every occurrence of `sep`; "a,,b" yields three fields and ""
// yields one empty field.
std::vector<std::string> Split(std::string_view text, char sep);
std::string_view Trim(std::string_view text);
std::vector<std::string> SplitLines(std::string_view text);

// Strict full-field parses; throw ParseError tagged with `line`.
double ParseDoubleField(std::string_view field, std::size_t line);
std::int64_t ParseIntField(std::string_view field, std::size_t line);
std::uint64_t ParseUintField(std::string_view field, std::size_t line);

// Semicolon-joined ids, e.g. "1;4;7"; empty set is "".
std::string JoinIds(std::span<const int> ids, char sep = ';');
std::vector<int> ParseIds(std::string_view text, std::size_t line, char sep = ';');

}  // namespace ulk

#endif  // ULK_COMMON_TEXT_H_
