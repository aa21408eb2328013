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

#include "ulk/attack/screening.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "json.hpp"
#include "ulk/common/error.h"

namespace ulk {

ThresholdReport ThresholdCriterion(const IpvSet& ipvs, double alpha, ThresholdValue value_kind) {
  if (ipvs.size() < 2) throw InvalidArgument("threshold criterion needs at least two classes");
  ThresholdReport r;
  r.value_kind = value_kind;
  r.alpha = alpha;
  for (const auto& ipv : ipvs) {
    r.targets.push_back(ipv.target);
    r.values.push_back(value_kind == ThresholdValue::kMaxProb ? ipv.max_prob : ipv.probs.at(ipv.target));
  }
  const double n = static_cast<double>(r.values.size());
  auto [lo, hi] = std::minmax_element(r.values.begin(), r.values.end());
  if (*lo == *hi) {
    r.mu = *lo;
    r.sigma = 0.0;
  } else {
    double sum = 0.0;
    for (double v : r.values) sum += v;
    r.mu = sum / n;
    double sq = 0.0;
    for (double v : r.values) sq += (v - r.mu) * (v - r.mu);
    r.sigma = std::sqrt(sq / n);
  }
  r.theta = r.mu - alpha * r.sigma;
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (r.values[i] < r.theta) r.predicted.push_back(static_cast<int>(r.targets[i]));
  }
  std::sort(r.predicted.begin(), r.predicted.end());
  return r;
}

double Entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

namespace {

double SqDist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

struct Centroids {
  std::vector<double> c[2];
  std::size_t n[2] = {0, 0};
};

Centroids ComputeCentroids(std::span<const std::vector<double>> rows, std::span<const int> cluster) {
  Centroids c;
  const std::size_t d = rows[0].size();
  c.c[0].assign(d, 0.0);
  c.c[1].assign(d, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& dst = c.c[cluster[i]];
    for (std::size_t j = 0; j < d; ++j) dst[j] += rows[i][j];
    ++c.n[cluster[i]];
  }
  for (int k = 0; k < 2; ++k) {
    if (c.n[k] == 0) continue;
    for (double& v : c.c[k]) v /= static_cast<double>(c.n[k]);
  }
  return c;
}

// Lloyd iterations from two seed rows, then single-point moves that lower SSE.
std::vector<int> LloydFrom(std::span<const std::vector<double>> rows, std::size_t a, std::size_t b) {
  const std::size_t n = rows.size();
  std::vector<int> cluster(n, 0);
  std::vector<double> c0 = rows[a];
  std::vector<double> c1 = rows[b];
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int k = SqDist(rows[i], c1) < SqDist(rows[i], c0) ? 1 : 0;
      changed = changed || k != cluster[i];
      cluster[i] = k;
    }
    if (iter > 0 && !changed) break;
    Centroids c = ComputeCentroids(rows, cluster);
    if (c.n[0] == 0 || c.n[1] == 0) break;
    c0 = c.c[0];
    c1 = c.c[1];
  }
  // Hartigan-style polish: move a point if that lowers the total SSE.
  bool improved = true;
  for (int round = 0; improved && round < 100; ++round) {
    improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      Centroids c = ComputeCentroids(rows, cluster);
      int from = cluster[i];
      int to = 1 - from;
      if (c.n[from] <= 1) continue;
      double nf = static_cast<double>(c.n[from]);
      double nt = static_cast<double>(c.n[to]);
      double gain = nf / (nf - 1.0) * SqDist(rows[i], c.c[from]);
      double cost = nt / (nt + 1.0) * SqDist(rows[i], c.c[to]);
      if (cost < gain * (1.0 - 1e-12)) {
        cluster[i] = to;
        improved = true;
      }
    }
  }
  return cluster;
}

// Canonical labeling: row 0 is always in cluster 0.
void Canonicalize(std::vector<int>& cluster) {
  if (!cluster.empty() && cluster[0] == 1) {
    for (int& k : cluster) k = 1 - k;
  }
}

}  // namespace

double PartitionSse(std::span<const std::vector<double>> rows, std::span<const int> cluster) {
  Centroids c = ComputeCentroids(rows, cluster);
  double s = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) s += SqDist(rows[i], c.c[cluster[i]]);
  return s;
}

TwoMeans KMeansRows(std::span<const std::vector<double>> rows) {
  if (rows.empty()) throw InvalidArgument("k-means needs at least one row");
  for (const auto& r : rows) {
    if (r.size() != rows[0].size()) throw ShapeError("k-means rows differ in length");
  }
  TwoMeans out;
  const std::size_t n = rows.size();
  bool all_same = true;
  for (std::size_t i = 1; i < n && all_same; ++i) all_same = rows[i] == rows[0];
  if (all_same) {
    out.cluster.assign(n, 0);
    out.degenerate = true;
    return out;
  }
  // Farthest pair first; every other pair of distinct rows as a restart.
  std::vector<std::pair<std::size_t, std::size_t>> seeds;
  std::size_t fa = 0;
  std::size_t fb = 0;
  double far = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = SqDist(rows[i], rows[j]);
      if (d > far) {
        far = d;
        fa = i;
        fb = j;
      }
      if (d > 0.0) seeds.emplace_back(i, j);
    }
  }
  std::stable_partition(seeds.begin(), seeds.end(),
                        [&](const auto& p) { return p.first == fa && p.second == fb; });
  bool have = false;
  for (const auto& [a, b] : seeds) {
    std::vector<int> cluster = LloydFrom(rows, a, b);
    Canonicalize(cluster);
    if (std::count(cluster.begin(), cluster.end(), 1) == 0) continue;
    double sse = PartitionSse(rows, cluster);
    if (!have || sse < out.sse) {
      have = true;
      out.sse = sse;
      out.cluster = std::move(cluster);
    }
  }
  return out;
}

EntropyReport EntropyCriterion(const IpvSet& ipvs, ClassIdentity identity) {
  if (ipvs.size() < 2) throw InvalidArgument("entropy criterion needs at least two classes");
  EntropyReport r;
  r.identity = identity;
  for (const auto& ipv : ipvs) {
    r.targets.push_back(ipv.target);
    std::vector<double> s = ipv.probs;
    std::sort(s.begin(), s.end(), std::greater<>());
    r.sorted.push_back(std::move(s));
    r.entropies.push_back(Entropy(ipv.probs));
  }
  TwoMeans km = KMeansRows(r.sorted);
  r.cluster = km.cluster;
  r.sse = km.sse;
  r.degenerate = km.degenerate;
  if (r.degenerate) return r;
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < ipvs.size(); ++i) {
    r.mean_entropy[r.cluster[i]] += r.entropies[i];
    ++count[r.cluster[i]];
  }
  for (int k = 0; k < 2; ++k) r.mean_entropy[k] /= static_cast<double>(count[k]);
  if (r.mean_entropy[0] == r.mean_entropy[1]) {
    r.degenerate = true;
    return r;
  }
  r.forgotten_cluster = r.mean_entropy[1] > r.mean_entropy[0] ? 1 : 0;
  for (std::size_t i = 0; i < ipvs.size(); ++i) {
    if (r.cluster[i] != r.forgotten_cluster) continue;
    if (identity == ClassIdentity::kTarget) {
      r.predicted.push_back(static_cast<int>(ipvs[i].target));
    } else {
      const auto& p = ipvs[i].probs;
      r.predicted.push_back(static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin()));
    }
  }
  std::sort(r.predicted.begin(), r.predicted.end());
  r.predicted.erase(std::unique(r.predicted.begin(), r.predicted.end()), r.predicted.end());
  return r;
}

std::string ReportJson(const ThresholdReport& r) {
  nlohmann::ordered_json j;
  j["criterion"] = "threshold";
  j["value"] = r.value_kind == ThresholdValue::kMaxProb ? "max_prob" : "target_prob";
  j["mu_max"] = r.mu;
  j["sigma_max"] = r.sigma;
  j["thr_alpha"] = r.alpha;
  j["theta"] = r.theta;
  j["targets"] = r.targets;
  j["max_prob"] = r.values;
  j["predicted"] = r.predicted;
  return j.dump(2) + "\n";
}

std::string ReportJson(const EntropyReport& r) {
  nlohmann::ordered_json j;
  j["criterion"] = "entropy";
  j["identity"] = r.identity == ClassIdentity::kTarget ? "target" : "argmax";
  j["targets"] = r.targets;
  j["cluster"] = r.cluster;
  j["mean_entropy"] = {r.mean_entropy[0], r.mean_entropy[1]};
  j["forgotten_cluster"] = r.forgotten_cluster;
  j["entropy"] = r.entropies;
  j["sse"] = r.sse;
  j["degenerate"] = r.degenerate;
  j["sorted"] = r.sorted;
  j["predicted"] = r.predicted;
  return j.dump(2) + "\n";
}

}  // namespace ulk
