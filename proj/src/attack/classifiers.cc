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

#include "ulk/attack/classifiers.h"

#include <algorithm>
#include <numeric>

#include "ulk/common/error.h"

namespace ulk {

YoudenResult YoudenThreshold(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw InvalidArgument("labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw DegenerateInputError("Youden threshold needs both labels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Candidates are compared on the exact integer numerator of J * pos * neg.
  YoudenResult best;
  best.threshold = scores[order.front()];
  best.degenerate = true;
  bool have = false;
  long long best_num = 0;
  std::size_t pos_below = 0;
  std::size_t neg_below = 0;
  const auto sp = static_cast<long long>(pos);
  const auto sn = static_cast<long long>(neg);
  auto make = [&](double cut, Orientation o, std::size_t tp, std::size_t fp) {
    double tpr = static_cast<double>(tp) / static_cast<double>(pos);
    double fpr = static_cast<double>(fp) / static_cast<double>(neg);
    return YoudenResult{cut, o, tpr - fpr, tpr, fpr, false};
  };
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    if (labels[order[i]] == 1) ++pos_below; else ++neg_below;
    double lo = scores[order[i]];
    double hi = scores[order[i + 1]];
    if (!(lo < hi)) continue;
    double cut = lo + (hi - lo) / 2.0;
    long long below = static_cast<long long>(pos_below) * sn - static_cast<long long>(neg_below) * sp;
    long long above = -below;
    if (!have || below > best_num) {
      best = make(cut, Orientation::kPositiveBelow, pos_below, neg_below);
      best_num = below;
      have = true;
    }
    if (above > best_num) {
      best = make(cut, Orientation::kPositiveAbove, pos - pos_below, neg - neg_below);
      best_num = above;
    }
  }
  best.degenerate = !have || best_num <= 0;
  if (!have) best.j = 0.0;
  return best;
}

int YoudenPredict(const YoudenResult& cut, double score) {
  if (cut.orientation == Orientation::kPositiveBelow) return score < cut.threshold ? 1 : 0;
  return score > cut.threshold ? 1 : 0;
}

KMeans1dResult KMeans1d(std::span<const double> scores) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  if (n < 2 || !(scores[order.front()] < scores[order.back()])) {
    throw DegenerateInputError("k-means needs at least two distinct values");
  }
  // Shift by the mean so the prefix-sum SSE formula does not cancel badly.
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(n);
  std::vector<double> sum(n + 1, 0.0);
  std::vector<double> sq(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double v = scores[order[i]] - mean;
    sum[i + 1] = sum[i] + v;
    sq[i + 1] = sq[i] + v * v;
  }
  auto sse = [&](std::size_t a, std::size_t b) {  // sorted range [a, b)
    double s = sum[b] - sum[a];
    double q = sq[b] - sq[a];
    double v = q - s * s / static_cast<double>(b - a);
    return v > 0.0 ? v : 0.0;
  };
  std::size_t best_split = 0;
  double best_sse = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    if (!(scores[order[k - 1]] < scores[order[k]])) continue;
    double total = sse(0, k) + sse(k, n);
    if (best_split == 0 || total < best_sse) {
      best_split = k;
      best_sse = total;
    }
  }
  KMeans1dResult r;
  r.sse = best_sse;
  r.cluster.assign(n, 1);
  for (std::size_t i = 0; i < best_split; ++i) r.cluster[order[i]] = 0;
  r.low_centroid = mean + sum[best_split] / static_cast<double>(best_split);
  r.high_centroid = mean + (sum[n] - sum[best_split]) / static_cast<double>(n - best_split);
  r.boundary = r.low_centroid + (r.high_centroid - r.low_centroid) / 2.0;
  return r;
}

double Gini(std::size_t zeros, std::size_t ones) {
  const std::size_t total = zeros + ones;
  if (total == 0) return 0.0;
  double p0 = static_cast<double>(zeros) / static_cast<double>(total);
  double p1 = static_cast<double>(ones) / static_cast<double>(total);
  return 1.0 - p0 * p0 - p1 * p1;
}

namespace {

double WeightedGini(std::size_t l0, std::size_t l1, std::size_t r0, std::size_t r1) {
  double nl = static_cast<double>(l0 + l1);
  double nr = static_cast<double>(r0 + r1);
  return (nl * Gini(l0, l1) + nr * Gini(r0, r1)) / (nl + nr);
}

// Weighted Gini is n - S over n with S = (l0^2 + l1^2) / nl + (r0^2 + r1^2) / nr,
// so a split is purer exactly when its S is larger. S is kept as a fraction.
struct Purity {
  __int128 num = 0;
  __int128 den = 1;
};

Purity SplitPurity(std::size_t l0, std::size_t l1, std::size_t r0, std::size_t r1) {
  const __int128 nl = l0 + l1;
  const __int128 nr = r0 + r1;
  const __int128 ql = static_cast<__int128>(l0) * l0 + static_cast<__int128>(l1) * l1;
  const __int128 qr = static_cast<__int128>(r0) * r0 + static_cast<__int128>(r1) * r1;
  return {ql * nr + qr * nl, nl * nr};
}

bool Purer(const Purity& a, const Purity& b) { return a.num * b.den > b.num * a.den; }

}  // namespace

GiniSplit BestGiniSplit(std::span<const std::vector<double>> rows, std::span<const int> labels,
                        std::span<const std::size_t> indices) {
  GiniSplit best;
  Purity best_purity;
  if (indices.size() < 2) return best;
  const std::size_t dims = rows[indices[0]].size();
  std::size_t total1 = 0;
  for (std::size_t i : indices) total1 += static_cast<std::size_t>(labels[i]);
  const std::size_t total0 = indices.size() - total1;
  std::vector<std::pair<double, int>> column(indices.size());
  for (std::size_t f = 0; f < dims; ++f) {
    for (std::size_t k = 0; k < indices.size(); ++k) {
      column[k] = {rows[indices[k]][f], labels[indices[k]]};
    }
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t l0 = 0;
    std::size_t l1 = 0;
    for (std::size_t k = 0; k + 1 < column.size(); ++k) {
      (column[k].second == 1 ? l1 : l0)++;
      if (!(column[k].first < column[k + 1].first)) continue;
      Purity purity = SplitPurity(l0, l1, total0 - l0, total1 - l1);
      if (!best.found || Purer(purity, best_purity)) {
        double cut = column[k].first + (column[k + 1].first - column[k].first) / 2.0;
        best = {true, f, cut, WeightedGini(l0, l1, total0 - l0, total1 - l1), false};
        best_purity = purity;
      }
    }
  }
  if (best.found) {
    const __int128 n = total0 + total1;
    const __int128 q = static_cast<__int128>(total0) * total0 + static_cast<__int128>(total1) * total1;
    best.improves = Purer(best_purity, Purity{q, n});
  }
  return best;
}

DecisionTree DecisionTree::Fit(std::span<const std::vector<double>> rows, std::span<const int> labels,
                               std::size_t max_depth) {
  if (rows.size() != labels.size()) throw InvalidArgument("rows and labels differ in length");
  if (rows.empty()) throw InvalidArgument("cannot fit a tree on no rows");
  for (const auto& r : rows) {
    if (r.size() != rows[0].size()) throw ShapeError("tree rows differ in length");
  }
  DecisionTree tree;
  tree.max_depth_ = max_depth;
  std::vector<std::size_t> all(rows.size());
  std::iota(all.begin(), all.end(), 0);
  tree.Grow(rows, labels, std::move(all), 0);
  return tree;
}

int DecisionTree::Grow(std::span<const std::vector<double>> rows, std::span<const int> labels,
                       std::vector<std::size_t> indices, std::size_t depth) {
  std::size_t ones = 0;
  for (std::size_t i : indices) ones += static_cast<std::size_t>(labels[i]);
  const std::size_t zeros = indices.size() - ones;
  int id = static_cast<int>(nodes_.size());
  TreeNode node;
  node.samples = indices.size();
  node.label = ones > zeros ? 1 : 0;  // ties go to 0
  nodes_.push_back(node);
  if (ones == 0 || zeros == 0 || depth >= max_depth_) return id;

  GiniSplit split = BestGiniSplit(rows, labels, indices);
  if (!split.found || !split.improves) return id;
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  for (std::size_t i : indices) {
    (rows[i][split.feature] <= split.threshold ? left : right).push_back(i);
  }
  int l = Grow(rows, labels, std::move(left), depth + 1);
  int r = Grow(rows, labels, std::move(right), depth + 1);
  nodes_[static_cast<std::size_t>(id)].feature = static_cast<int>(split.feature);
  nodes_[static_cast<std::size_t>(id)].threshold = split.threshold;
  nodes_[static_cast<std::size_t>(id)].left = l;
  nodes_[static_cast<std::size_t>(id)].right = r;
  return id;
}

int DecisionTree::Predict(std::span<const double> x) const {
  std::size_t n = 0;
  while (nodes_[n].feature >= 0) {
    const TreeNode& node = nodes_[n];
    n = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                     ? node.left
                                     : node.right);
  }
  return nodes_[n].label;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (nodes_[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

}  // namespace ulk
