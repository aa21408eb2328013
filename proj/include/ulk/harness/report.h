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

#ifndef ULK_HARNESS_REPORT_H_
#define ULK_HARNESS_REPORT_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ulk {

// Percentage of classes in [0, T) whose forgotten/retained status agrees
// between the two sets. Throws InvalidArgument on ids outside [0, T).
double Asr(std::span<const int> predicted, std::span<const int> truth, std::size_t num_classes);
// One '1' (agree) or '0' per class.
std::string PerClassCorrect(std::span<const int> predicted, std::span<const int> truth,
                            std::size_t num_classes);

struct AttackReport {
  std::string run_id;
  std::string dataset;
  std::string model;
  std::string unlearn_method;
  std::string attack;
  std::string criterion;
  std::size_t n_forget = 0;
  std::vector<int> predicted;  // sorted
  std::vector<int> truth;      // sorted
  double asr = 0.0;
  std::string per_class_correct;
  std::uint64_t seed = 0;
  std::string config_hash;
  double wall_time_s = 0.0;

  friend bool operator==(const AttackReport&, const AttackReport&) = default;
};

// Fills asr and per_class_correct from the sets.
void Score(AttackReport& report, std::size_t num_classes);

inline constexpr const char* kReportHeader =
    "run_id,dataset,model,unlearn_method,attack,criterion,n_forget,predicted,truth,asr,"
    "per_class_correct,seed,config_hash,wall_time_s";

std::string EncodeReportCsv(std::span<const AttackReport> rows);
// Throws ParseError (with the 1-based line) on malformed rows, including a
// stored ASR that disagrees with the stored sets.
std::vector<AttackReport> ParseReportCsv(const std::string& text);
void WriteReport(const std::filesystem::path& path, std::span<const AttackReport> rows);
std::vector<AttackReport> ReadReport(const std::filesystem::path& path);

struct PivotRow {
  std::string dataset;
  std::string attack;
  std::string criterion;
  std::string unlearn_method;  // "ALL" for the across-method average
  std::size_t n_forget = 0;
  std::size_t runs = 0;
  double mean_asr = 0.0;
};

// Mean ASR per (dataset, attack, criterion, n_forget, method), plus an "ALL"
// row per group averaging across methods. Sorted.
std::vector<PivotRow> Pivot(std::span<const AttackReport> rows);
std::string EncodePivotCsv(std::span<const PivotRow> rows);

}  // namespace ulk

#endif  // ULK_HARNESS_REPORT_H_
