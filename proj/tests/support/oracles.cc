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

#include "support/oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ulk/common/error.h"
#include "ulk/harness/report.h"

namespace ulk::oracle {

namespace {

std::vector<double> DistinctSorted(std::span<const double> v) {
  std::vector<double> d(v.begin(), v.end());
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  return d;
}

double Sse1d(std::span<const double> scores, const std::vector<int>& cluster) {
  double sum[2] = {0, 0};
  double cnt[2] = {0, 0};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    sum[cluster[i]] += scores[i];
    cnt[cluster[i]] += 1;
  }
  double sse = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    double d = scores[i] - sum[cluster[i]] / cnt[cluster[i]];
    sse += d * d;
  }
  return sse;
}

void Offer(PartitionBest& best, bool& have, double sse, std::vector<int> cluster, double tol) {
  if (!have || sse < best.sse - tol) {
    best.unique = true;
    best.sse = sse;
    best.cluster = std::move(cluster);
    have = true;
  } else if (std::abs(sse - best.sse) <= tol) {
    best.unique = false;
    if (sse < best.sse) {
      best.sse = sse;
      best.cluster = std::move(cluster);
    }
  }
}

}  // namespace

YoudenBest BruteYouden(std::span<const double> scores, std::span<const int> labels) {
  long long pos = 0;
  long long neg = 0;
  for (int y : labels) (y == 1 ? pos : neg)++;
  std::vector<double> d = DistinctSorted(scores);
  YoudenBest best;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    double cut = d[k] + (d[k + 1] - d[k]) / 2.0;
    for (Orientation o : {Orientation::kPositiveBelow, Orientation::kPositiveAbove}) {
      long long tp = 0;
      long long fp = 0;
      for (std::size_t i = 0; i < scores.size(); ++i) {
        bool flagged = o == Orientation::kPositiveBelow ? scores[i] <= d[k] : scores[i] > d[k];
        if (!flagged) continue;
        (labels[i] == 1 ? tp : fp)++;
      }
      long long num = tp * neg - fp * pos;
      if (!best.found || num > best.j_numerator) {
        best = {true, cut, o, num, static_cast<double>(tp) / pos - static_cast<double>(fp) / neg};
      }
    }
  }
  return best;
}

PartitionBest BruteKMeans1d(std::span<const double> scores, double tie_tol) {
  std::vector<double> d = DistinctSorted(scores);
  PartitionBest best;
  bool have = false;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    std::vector<int> cluster(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) cluster[i] = scores[i] <= d[k] ? 0 : 1;
    double sse = Sse1d(scores, cluster);
    Offer(best, have, sse, std::move(cluster), tie_tol);
  }
  if (!have) throw DegenerateInputError("no partition");
  return best;
}

PartitionBest BruteKMeans1dSubsets(std::span<const double> scores, double tie_tol) {
  const std::size_t n = scores.size();
  if (n > 20) throw InvalidArgument("too many points for subset enumeration");
  PartitionBest best;
  bool have = false;
  for (std::uint64_t mask = 1; mask < (1ULL << n) - 1; ++mask) {
    std::vector<int> cluster(n);
    for (std::size_t i = 0; i < n; ++i) cluster[i] = static_cast<int>((mask >> i) & 1);
    // Low side as cluster 0.
    double mean[2] = {0, 0};
    double cnt[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      mean[cluster[i]] += scores[i];
      cnt[cluster[i]] += 1;
    }
    if (mean[0] / cnt[0] > mean[1] / cnt[1]) {
      for (int& c : cluster) c = 1 - c;
    }
    double sse = Sse1d(scores, cluster);
    if (have && cluster == best.cluster) continue;
    Offer(best, have, sse, std::move(cluster), tie_tol);
  }
  return best;
}

StumpBest BruteStump(std::span<const std::vector<double>> rows, std::span<const int> labels) {
  StumpBest best;
  if (rows.size() < 2) return best;
  __int128 best_num = 0;
  __int128 best_den = 1;
  __int128 parent_num = 0;
  __int128 parent_den = static_cast<__int128>(rows.size());
  {
    __int128 c[2] = {0, 0};
    for (int y : labels) ++c[y];
    parent_num = c[0] * c[0] + c[1] * c[1];
  }
  for (std::size_t f = 0; f < rows[0].size(); ++f) {
    std::vector<double> col;
    for (const auto& r : rows) col.push_back(r[f]);
    std::vector<double> d = DistinctSorted(col);
    for (std::size_t k = 0; k + 1 < d.size(); ++k) {
      __int128 l[2] = {0, 0};
      __int128 r[2] = {0, 0};
      for (std::size_t i = 0; i < rows.size(); ++i) ++(col[i] <= d[k] ? l : r)[labels[i]];
      __int128 nl = l[0] + l[1];
      __int128 nr = r[0] + r[1];
      __int128 num = (l[0] * l[0] + l[1] * l[1]) * nr + (r[0] * r[0] + r[1] * r[1]) * nl;
      __int128 den = nl * nr;
      if (!best.found || num * best_den > best_num * den) {
        best.found = true;
        best.feature = f;
        best.threshold = d[k] + (d[k + 1] - d[k]) / 2.0;
        best_num = num;
        best_den = den;
      }
    }
  }
  if (best.found) best.improves = best_num * parent_den > parent_num * best_den;
  return best;
}

double DirectSse(std::span<const std::vector<double>> rows, std::span<const int> cluster) {
  const std::size_t dim = rows[0].size();
  std::vector<double> mean[2] = {std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  double cnt[2] = {0, 0};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) mean[cluster[i]][j] += rows[i][j];
    cnt[cluster[i]] += 1;
  }
  for (int c = 0; c < 2; ++c) {
    for (double& m : mean[c]) m = cnt[c] > 0 ? m / cnt[c] : 0.0;
  }
  double sse = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      double d = rows[i][j] - mean[cluster[i]][j];
      sse += d * d;
    }
  }
  return sse;
}

PartitionBest BruteTwoPartition(std::span<const std::vector<double>> rows, double tie_tol) {
  const std::size_t n = rows.size();
  if (n < 2 || n > 20) throw InvalidArgument("row count out of range for enumeration");
  PartitionBest best;
  bool have = false;
  // Row 0 stays in cluster 0; every other labeling with a non-empty cluster 1.
  for (std::uint64_t mask = 1; mask < (1ULL << (n - 1)); ++mask) {
    std::vector<int> cluster(n, 0);
    for (std::size_t i = 1; i < n; ++i) cluster[i] = static_cast<int>((mask >> (i - 1)) & 1);
    double sse = DirectSse(rows, cluster);
    Offer(best, have, sse, std::move(cluster), tie_tol);
  }
  return best;
}

double RelativeError(std::span<const double> a, std::span<const double> b) {
  double diff = 0;
  double na = 0;
  double nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

double InputGradientError(const ModelArtifact& model, const Tensor& x, const InversionObjective& objective,
                          double h) {
  LossEval eval = EvaluateInversionLoss(model, x, objective, true);
  std::vector<double> numeric(x.size());
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    double up = EvaluateInversionLoss(model, probe, objective, false).total;
    probe[i] = x[i] - h;
    double down = EvaluateInversionLoss(model, probe, objective, false).total;
    probe[i] = x[i];
    numeric[i] = (up - down) / (2.0 * h);
  }
  return RelativeError(eval.grad.values(), numeric);
}

namespace {

double MeanCe(const ModelArtifact& model, std::span<const double> inputs, std::span<const int> labels) {
  const std::size_t d = inputs.size() / labels.size();
  double total = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Tensor logits = Forward(model, inputs.subspan(i * d, d));
    total += SoftmaxCrossEntropy(logits.values(), static_cast<std::size_t>(labels[i])).loss;
  }
  return total / static_cast<double>(labels.size());
}

}  // namespace

double ParamGradientError(const ModelArtifact& model, std::span<const double> inputs,
                          std::span<const int> labels, double h) {
  Batch batch{inputs, inputs.size() / labels.size(), labels, 0};
  BatchGrad g = GradParams(model, batch);
  std::vector<double> analytic;
  std::vector<double> numeric;
  ParamSet params = model.params();
  for (std::size_t l = 0; l < params.size(); ++l) {
    if (!model.IsTrainable(l)) continue;
    for (std::size_t t = 0; t < params[l].size(); ++t) {
      for (std::size_t i = 0; i < params[l][t].size(); ++i) {
        const double keep = params[l][t][i];
        params[l][t][i] = keep + h;
        double up = MeanCe(model.WithParams(params), inputs, labels);
        params[l][t][i] = keep - h;
        double down = MeanCe(model.WithParams(params), inputs, labels);
        params[l][t][i] = keep;
        numeric.push_back((up - down) / (2.0 * h));
        analytic.push_back(g.grads.param_grads[l][t][i]);
      }
    }
  }
  return RelativeError(analytic, numeric);
}

ModelArtifact RandomSmallNet(Rng& rng, bool cnn) {
  ModelSpec spec;
  if (cnn) {
    std::size_t c = 1 + rng.Below(2);
    std::size_t side = 6 + rng.Below(3);
    std::vector<std::size_t> channels = {2 + rng.Below(2)};
    Padding pad = rng.Below(2) == 0 ? Padding::kValid : Padding::kSame;
    spec = ModelSpec::Cnn({c, side, side}, channels, 2 + rng.Below(3), pad);
  } else {
    std::vector<std::size_t> dims = {3 + rng.Below(6)};
    std::size_t hidden = 1 + rng.Below(2);
    for (std::size_t i = 0; i < hidden; ++i) dims.push_back(3 + rng.Below(6));
    dims.push_back(2 + rng.Below(4));
    spec = ModelSpec::Mlp(dims);
  }
  ModelArtifact m = Build(spec, rng.NextU64());
  ParamSet params = m.params();
  for (auto& layer : params) {
    if (layer.size() == 2) {
      for (double& b : layer[1].values()) b = 0.1 * rng.Normal();
    }
  }
  return m.WithParams(std::move(params));
}

std::vector<double> RandomInput(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.Normal();
  return v;
}

double BootstrapMeanQuantile(std::span<const double> values, std::size_t resamples, double q,
                             std::uint64_t seed) {
  if (values.empty()) throw InvalidArgument("bootstrap of no values");
  Rng rng(seed);
  std::vector<double> means(resamples);
  for (double& m : means) {
    double s = 0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[rng.Below(values.size())];
    m = s / static_cast<double>(values.size());
  }
  std::sort(means.begin(), means.end());
  std::size_t idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(resamples - 1)));
  return means[idx];
}

double RandomGuessMeanAsr(std::size_t trials, std::size_t num_classes, std::uint64_t seed) {
  Rng rng(seed);
  double total = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<int> truth;
    while (truth.empty() || truth.size() == num_classes) {
      truth.clear();
      for (std::size_t c = 0; c < num_classes; ++c) {
        if (rng.Below(2) == 1) truth.push_back(static_cast<int>(c));
      }
    }
    std::vector<int> guess;
    for (std::size_t c = 0; c < num_classes; ++c) {
      if (rng.Below(2) == 1) guess.push_back(static_cast<int>(c));
    }
    total += Asr(guess, truth, num_classes);
  }
  return total / static_cast<double>(trials);
}

}  // namespace ulk::oracle
