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

#ifndef ULK_TESTS_SUPPORT_ORACLES_H_
#define ULK_TESTS_SUPPORT_ORACLES_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ulk/attack/classifiers.h"
#include "ulk/common/rng.h"
#include "ulk/nn/autodiff.h"
#include "ulk/nn/model.h"

// Slow, obviously-correct reference implementations and numeric checks
// shared by the unit and acceptance suites.
namespace ulk::oracle {

// Every cut between distinct values in both orientations, counted directly.
// Best by exact J numerator; ties to the lower cut, then positive-below.
struct YoudenBest {
  bool found = false;
  double threshold = 0.0;
  Orientation orientation = Orientation::kPositiveBelow;
  long long j_numerator = 0;  // J * pos * neg
  double j = 0.0;
};
YoudenBest BruteYouden(std::span<const double> scores, std::span<const int> labels);

// Minimum two-cluster SSE over every threshold partition {x <= v}, each SSE
// computed from scratch. `unique` is false when another partition comes
// within `tie_tol` of the optimum.
struct PartitionBest {
  double sse = 0.0;
  std::vector<int> cluster;  // 0 = low side
  bool unique = true;
};
PartitionBest BruteKMeans1d(std::span<const double> scores, double tie_tol = 1e-9);
// Same, over all 2^(n-1) labelings; n <= 20.
PartitionBest BruteKMeans1dSubsets(std::span<const double> scores, double tie_tol = 1e-9);

// Every feature and every distinct value v as the left bound {x_f <= v};
// purity compared exactly.
struct StumpBest {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  bool improves = false;
};
StumpBest BruteStump(std::span<const std::vector<double>> rows, std::span<const int> labels);

// Minimum SSE over every two-way partition of rows with both sides
// non-empty; n <= 20.
PartitionBest BruteTwoPartition(std::span<const std::vector<double>> rows, double tie_tol = 1e-9);
double DirectSse(std::span<const std::vector<double>> rows, std::span<const int> cluster);

// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
double RelativeError(std::span<const double> a, std::span<const double> b);

// Central-difference check of d(CE + l2 + tv)/dx; returns the relative error.
double InputGradientError(const ModelArtifact& model, const Tensor& x, const InversionObjective& objective,
                          double h = 1e-5);
// Central-difference check of the mean batch CE with respect to every
// trainable parameter; returns the relative error.
double ParamGradientError(const ModelArtifact& model, std::span<const double> inputs,
                          std::span<const int> labels, double h = 1e-5);

// Small MLP or CNN with random weights and non-zero biases.
ModelArtifact RandomSmallNet(Rng& rng, bool cnn);
std::vector<double> RandomInput(Rng& rng, std::size_t n);

// Percentile bootstrap of the mean: returns the `q` quantile.
double BootstrapMeanQuantile(std::span<const double> values, std::size_t resamples, double q,
                             std::uint64_t seed);

// Mean ASR of a screener that flags each class with probability 1/2, over
// `trials` random non-empty strict-subset truths.
double RandomGuessMeanAsr(std::size_t trials, std::size_t num_classes, std::uint64_t seed);

}  // namespace ulk::oracle

#endif  // ULK_TESTS_SUPPORT_ORACLES_H_
