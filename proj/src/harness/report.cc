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

#include "ulk/harness/report.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "ulk/common/error.h"
#include "ulk/common/text.h"
#include "ulk/nn/checkpoint.h"

namespace ulk {

namespace {

std::vector<bool> Membership(std::span<const int> ids, std::size_t num_classes, const char* which) {
  std::vector<bool> in(num_classes, false);
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= num_classes) {
      throw InvalidArgument(fmt::format("{} class {} outside [0,{})", which, id, num_classes));
    }
    in[static_cast<std::size_t>(id)] = true;
  }
  return in;
}

}  // namespace

std::string PerClassCorrect(std::span<const int> predicted, std::span<const int> truth,
                            std::size_t num_classes) {
  if (num_classes == 0) throw InvalidArgument("ASR needs at least one class");
  auto p = Membership(predicted, num_classes, "predicted");
  auto t = Membership(truth, num_classes, "true");
  std::string out(num_classes, '0');
  for (std::size_t i = 0; i < num_classes; ++i) out[i] = p[i] == t[i] ? '1' : '0';
  return out;
}

double Asr(std::span<const int> predicted, std::span<const int> truth, std::size_t num_classes) {
  std::string bits = PerClassCorrect(predicted, truth, num_classes);
  auto correct = static_cast<double>(std::count(bits.begin(), bits.end(), '1'));
  return 100.0 * correct / static_cast<double>(num_classes);
}

void Score(AttackReport& report, std::size_t num_classes) {
  std::sort(report.predicted.begin(), report.predicted.end());
  std::sort(report.truth.begin(), report.truth.end());
  report.per_class_correct = PerClassCorrect(report.predicted, report.truth, num_classes);
  report.asr = Asr(report.predicted, report.truth, num_classes);
  report.n_forget = report.truth.size();
}

namespace {

void CheckCell(const std::string& value, const char* column) {
  if (value.find_first_of(",\n\r\"") != std::string::npos) {
    throw InvalidArgument(fmt::format("report {} '{}' contains a CSV delimiter", column, value));
  }
}

}  // namespace

std::string EncodeReportCsv(std::span<const AttackReport> rows) {
  std::string out = std::string(kReportHeader) + "\n";
  for (const AttackReport& r : rows) {
    for (auto [v, c] : {std::pair{&r.run_id, "run_id"}, {&r.dataset, "dataset"}, {&r.model, "model"},
                        {&r.unlearn_method, "unlearn_method"}, {&r.attack, "attack"},
                        {&r.criterion, "criterion"}, {&r.config_hash, "config_hash"}}) {
      CheckCell(*v, c);
    }
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.run_id, r.dataset, r.model,
                       r.unlearn_method, r.attack, r.criterion, r.n_forget, JoinIds(r.predicted),
                       JoinIds(r.truth), r.asr, r.per_class_correct, r.seed, r.config_hash, r.wall_time_s);
  }
  return out;
}

std::vector<AttackReport> ParseReportCsv(const std::string& text) {
  std::vector<std::string> lines = SplitLines(text);
  if (lines.empty() || lines[0] != kReportHeader) throw ParseError(1, "unexpected report header");
  std::vector<AttackReport> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (lines[i].empty()) continue;
    auto c = Split(lines[i], ',');
    if (c.size() != 14) throw ParseError(line, fmt::format("expected 14 columns, found {}", c.size()));
    AttackReport r;
    r.run_id = c[0];
    r.dataset = c[1];
    r.model = c[2];
    r.unlearn_method = c[3];
    r.attack = c[4];
    r.criterion = c[5];
    r.n_forget = ParseUintField(c[6], line);
    r.predicted = ParseIds(c[7], line);
    r.truth = ParseIds(c[8], line);
    r.asr = ParseDoubleField(c[9], line);
    r.per_class_correct = c[10];
    r.seed = ParseUintField(c[11], line);
    r.config_hash = c[12];
    r.wall_time_s = ParseDoubleField(c[13], line);
    const std::size_t classes = r.per_class_correct.size();
    if (classes == 0 || r.per_class_correct.find_first_not_of("01") != std::string::npos) {
      throw ParseError(line, "per_class_correct must be a non-empty 0/1 string");
    }
    if (!std::is_sorted(r.predicted.begin(), r.predicted.end()) || !std::is_sorted(r.truth.begin(), r.truth.end())) {
      throw ParseError(line, "class sets must be sorted");
    }
    try {
      AttackReport check = r;
      Score(check, classes);
      if (check.per_class_correct != r.per_class_correct || std::fabs(check.asr - r.asr) > 1e-9 ||
          r.n_forget != r.truth.size()) {
        throw ParseError(line, "stored ASR does not match the stored sets");
      }
    } catch (const InvalidArgument& e) {
      throw ParseError(line, e.what());
    }
    if (r.asr < 0.0 || r.asr > 100.0) throw ParseError(line, "ASR outside [0,100]");
    rows.push_back(std::move(r));
  }
  return rows;
}

void WriteReport(const std::filesystem::path& path, std::span<const AttackReport> rows) {
  std::string text = EncodeReportCsv(rows);
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<AttackReport> ReadReport(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = ReadFileBytes(path);
  return ParseReportCsv(std::string(bytes.begin(), bytes.end()));
}

std::vector<PivotRow> Pivot(std::span<const AttackReport> rows) {
  using Key = std::tuple<std::string, std::string, std::string, std::size_t, std::string>;
  std::map<Key, std::pair<double, std::size_t>> sums;
  for (const AttackReport& r : rows) {
    for (const std::string& method : {r.unlearn_method, std::string("ALL")}) {
      auto& s = sums[{r.dataset, r.attack, r.criterion, r.n_forget, method}];
      s.first += r.asr;
      s.second += 1;
    }
  }
  std::vector<PivotRow> out;
  for (const auto& [k, s] : sums) {
    out.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), std::get<4>(k), std::get<3>(k), s.second,
                   s.first / static_cast<double>(s.second)});
  }
  return out;
}

std::string EncodePivotCsv(std::span<const PivotRow> rows) {
  std::string out = "dataset,attack,criterion,n_forget,unlearn_method,runs,mean_asr\n";
  for (const PivotRow& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{:.2f}\n", r.dataset, r.attack, r.criterion, r.n_forget,
                       r.unlearn_method, r.runs, r.mean_asr);
  }
  return out;
}

}  // namespace ulk
