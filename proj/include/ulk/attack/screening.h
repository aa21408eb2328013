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

#ifndef ULK_ATTACK_SCREENING_H_
#define ULK_ATTACK_SCREENING_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ulk/attack/inversion.h"

namespace ulk {

// Which IPV entry is screened by the threshold criterion.
enum class ThresholdValue { kMaxProb, kTargetProb };

struct ThresholdReport {
  ThresholdValue value_kind = ThresholdValue::kMaxProb;
  double mu = 0.0;     // population mean of the screened values
  double sigma = 0.0;  // population standard deviation
  double alpha = 1.0;
  double theta = 0.0;  // mu - alpha * sigma
  std::vector<std::size_t> targets;
  std::vector<double> values;
  std::vector<int> predicted;
};

// Flags every class whose value falls strictly below theta.
ThresholdReport ThresholdCriterion(const IpvSet& ipvs, double alpha,
                                   ThresholdValue value_kind = ThresholdValue::kMaxProb);

// Natural-log Shannon entropy with 0 log 0 = 0.
double Entropy(std::span<const double> p);

// Reported identity of a vector in the forgotten cluster.
enum class ClassIdentity { kTarget, kArgmax };

struct TwoMeans {
  std::vector<int> cluster;  // 0 or 1 per row
  double sse = 0.0;
  bool degenerate = false;  // all rows identical
};

// Exact-as-practical two-means on rows: Lloyd (100-iteration cap) started from
// the farthest pair and from every other pair of rows, each polished with
// single-point moves; the lowest-SSE partition wins. Deterministic.
TwoMeans KMeansRows(std::span<const std::vector<double>> rows);
double PartitionSse(std::span<const std::vector<double>> rows, std::span<const int> cluster);

struct EntropyReport {
  ClassIdentity identity = ClassIdentity::kTarget;
  std::vector<std::size_t> targets;
  std::vector<std::vector<double>> sorted;  // each IPV sorted descending
  std::vector<double> entropies;            // of the original vectors
  std::vector<int> cluster;
  double mean_entropy[2] = {0.0, 0.0};
  int forgotten_cluster = -1;  // -1 when degenerate
  double sse = 0.0;
  bool degenerate = false;
  std::vector<int> predicted;
};

EntropyReport EntropyCriterion(const IpvSet& ipvs, ClassIdentity identity = ClassIdentity::kTarget);

// Pretty-printed JSON holding every report field.
std::string ReportJson(const ThresholdReport& r);
std::string ReportJson(const EntropyReport& r);

}  // namespace ulk

#endif  // ULK_ATTACK_SCREENING_H_
