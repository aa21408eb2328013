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

#ifndef ULK_ATTACK_CLASSIFIERS_H_
#define ULK_ATTACK_CLASSIFIERS_H_

#include <cstddef>
#include <span>
#include <vector>

// Small supervised/unsupervised screeners used on attack feature sets.
namespace ulk {

// Which side of the threshold is predicted as label 1.
enum class Orientation { kPositiveBelow, kPositiveAbove };

struct YoudenResult {
  double threshold = 0.0;
  Orientation orientation = Orientation::kPositiveBelow;
  double j = 0.0;  // TPR - FPR at the threshold
  double tpr = 0.0;
  double fpr = 0.0;
  bool degenerate = false;  // no cut separates anything (J <= 0)
};

// Maximizes Youden's J = TPR - FPR over cut points at midpoints of adjacent
// distinct sorted scores, in both orientations. Ties resolve to the lower
// threshold, then to kPositiveBelow. Throws DegenerateInputError unless both
// labels (0 and 1) occur.
YoudenResult YoudenThreshold(std::span<const double> scores, std::span<const int> labels);
int YoudenPredict(const YoudenResult& cut, double score);

struct KMeans1dResult {
  std::vector<int> cluster;  // per input: 0 = low-centroid (unlearn side), 1 = high
  double low_centroid = 0.0;
  double high_centroid = 0.0;
  double boundary = 0.0;  // midpoint of the two centroids
  double sse = 0.0;
};

// Exact two-cluster 1-D k-means: the optimum is contiguous in sorted order,
// so every split between distinct values is scanned. Throws
// DegenerateInputError with fewer than two distinct values.
KMeans1dResult KMeans1d(std::span<const double> scores);

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  int label = 0;
  std::size_t samples = 0;
};

struct GiniSplit {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;  // sample-weighted Gini of the two children
  bool improves = false;  // strictly below the parent's Gini, compared exactly
};

double Gini(std::size_t zeros, std::size_t ones);

// Best axis-aligned split of rows[indices] by weighted Gini; thresholds are
// midpoints of adjacent distinct values. Ties resolve to the lowest feature,
// then the lowest threshold. Comparisons use exact integer arithmetic.
GiniSplit BestGiniSplit(std::span<const std::vector<double>> rows, std::span<const int> labels,
                        std::span<const std::size_t> indices);

// CART with greedy Gini splits on binary labels.
class DecisionTree {
 public:
  static DecisionTree Fit(std::span<const std::vector<double>> rows, std::span<const int> labels,
                          std::size_t max_depth);

  int Predict(std::span<const double> x) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;
  std::size_t max_depth() const { return max_depth_; }

 private:
  int Grow(std::span<const std::vector<double>> rows, std::span<const int> labels,
           std::vector<std::size_t> indices, std::size_t depth);

  std::vector<TreeNode> nodes_;
  std::size_t max_depth_ = 0;
};

}  // namespace ulk

#endif  // ULK_ATTACK_CLASSIFIERS_H_
