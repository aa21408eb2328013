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

#ifndef ULK_HARNESS_EXPERIMENT_H_
#define ULK_HARNESS_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ulk/data/dataset.h"
#include "ulk/harness/config.h"
#include "ulk/harness/report.h"

namespace ulk {

struct ExperimentData {
  LabeledDataset train;
  LabeledDataset test;  // the attacker's auxiliary pool
  std::string id;
};

ExperimentData LoadExperimentData(const ExperimentConfig& cfg, std::uint64_t seed);

struct CellFailure {
  std::uint64_t seed = 0;
  std::string forget;
  std::string method;
  std::string attack;
  std::string error;
};

struct UnlearnMetrics {
  std::uint64_t seed = 0;
  std::vector<int> forget;
  std::string method;
  double original_forget_acc = 0.0;
  double original_rest_acc = 0.0;
  double forget_acc = 0.0;
  double rest_acc = 0.0;
};

struct ExperimentOutcome {
  std::filesystem::path run_dir;
  std::vector<AttackReport> reports;
  std::vector<CellFailure> failures;
  std::vector<UnlearnMetrics> unlearning;
  // Black-box generations whose best fitness was checked against the previous one.
  std::size_t ga_generations_checked = 0;
};

// Runs every (seed x forget task x method x attack x criterion) cell. Results
// land in <out>/<config hash>/: report.csv, unlearning.csv, failures.csv and
// per-cell artifacts. A failing cell is recorded and the grid continues.
ExperimentOutcome RunExperiment(const ExperimentConfig& cfg);

std::string DescribeModel(const ModelSpec& spec);

}  // namespace ulk

#endif  // ULK_HARNESS_EXPERIMENT_H_
