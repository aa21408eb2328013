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

#include "ulk/attack/param_attack.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "ulk/common/error.h"
#include "ulk/common/rng.h"
#include "ulk/simd/kernels.h"

namespace ulk {

std::vector<AuxHead> TrainAuxModels(const ModelArtifact& target, const LabeledDataset& pool,
                                    std::span<const ClassSubset> subsets, const AuxConfig& cfg) {
  std::vector<AuxHead> out;
  out.reserve(subsets.size());
  const ModelArtifact template_model = CloneFrozenHeadTemplate(target, cfg.seed);
  for (const ClassSubset& s : subsets) {
    if (s.indices.empty()) {
      throw InvalidArgument(fmt::format("aux subset for class {} is empty", s.class_id));
    }
    LabeledDataset data = pool.Subset(s.indices, "aux");
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.label(i) != s.class_id) {
        throw InvalidArgument(fmt::format("aux subset for class {} is not label-pure", s.class_id));
      }
    }
    // Every aux model starts from the same template head; only the subset
    // (and batch order) differs between them.
    TrainConfig tc = cfg.train;
    tc.seed = Rng::Mix(cfg.seed ^ Rng::Mix(static_cast<std::uint64_t>(s.class_id) * 1000003u + s.model_index));
    TrainResult trained = Train(template_model.WithProvenance(Provenance::Auxiliary(s.class_id)), data, tc);
    AuxHead h;
    h.head = HeadVector(trained.model, cfg.include_bias);
    h.head.source = fmt::format("aux:{}:{}", s.class_id, s.model_index);
    h.class_id = s.class_id;
    h.aux_id = s.model_index;
    out.push_back(std::move(h));
  }
  return out;
}

namespace {

int RowLabel(const ForgetTask* truth, int class_id) {
  if (truth == nullptr) return -1;
  return truth->Contains(class_id) ? 1 : 0;
}

void CheckLength(const ParameterVector& w, const AuxHead& a) {
  if (a.head.values.size() != w.values.size()) {
    throw ShapeError(fmt::format("aux head {} has {} values, target head has {}", a.head.source,
                                 a.head.values.size(), w.values.size()));
  }
}

}  // namespace

DotFeatureSet DotFeatures(const ParameterVector& w_rest, std::span<const AuxHead> aux,
                          const ForgetTask* truth, bool cosine) {
  DotFeatureSet rows;
  rows.reserve(aux.size());
  const double target_norm = std::sqrt(simd::Dot(w_rest.values, w_rest.values));
  for (const AuxHead& a : aux) {
    CheckLength(w_rest, a);
    double v = simd::Dot(w_rest.values, a.head.values);
    if (cosine) {
      double norm = target_norm * std::sqrt(simd::Dot(a.head.values, a.head.values));
      v = norm > 0.0 ? v / norm : 0.0;
    }
    rows.push_back({v, RowLabel(truth, a.class_id), a.class_id, a.aux_id});
  }
  return rows;
}

DiffFeatureSet DiffFeatures(const ParameterVector& w_rest, std::span<const AuxHead> aux,
                            const ForgetTask* truth) {
  DiffFeatureSet rows;
  rows.reserve(aux.size());
  for (const AuxHead& a : aux) {
    CheckLength(w_rest, a);
    std::vector<double> d(a.head.values.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.head.values[i] - w_rest.values[i];
    rows.push_back({std::move(d), RowLabel(truth, a.class_id), a.class_id, a.aux_id});
  }
  return rows;
}

std::vector<int> InferForgotten(std::span<const RowVote> votes) {
  std::map<int, std::pair<std::size_t, std::size_t>> tally;  // class -> (ones, total)
  for (const RowVote& v : votes) {
    auto& t = tally[v.class_id];
    t.first += v.predicted == 1 ? 1 : 0;
    t.second += 1;
  }
  std::vector<int> out;
  for (const auto& [c, t] : tally) {
    if (2 * t.first > t.second) out.push_back(c);
  }
  return out;
}

ParamAttackInputs PrepareParamAttack(const ModelArtifact& target, const LabeledDataset& pool,
                                     const ParamAttackConfig& cfg) {
  std::vector<ClassSubset> subsets =
      PerClassSubsets(pool, cfg.aux.subset_size, cfg.aux.models_per_class, cfg.aux.seed);
  ParamAttackInputs in;
  in.target_head = HeadVector(target, cfg.aux.include_bias);
  in.target_head.source = "target";
  in.aux = TrainAuxModels(target, pool, subsets, cfg.aux);
  return in;
}

namespace {

std::size_t FitCount(const ParamAttackConfig& cfg) {
  if (!(cfg.fit_fraction > 0.0 && cfg.fit_fraction <= 1.0)) {
    throw InvalidArgument("fit_fraction must lie in (0, 1]");
  }
  auto n = static_cast<std::size_t>(
      std::floor(cfg.fit_fraction * static_cast<double>(cfg.aux.models_per_class)));
  return std::max<std::size_t>(n, 1);
}

// Rows used to fit, and rows that vote.
bool FitsRow(std::size_t aux_id, std::size_t fit_count, bool all) { return all || aux_id < fit_count; }
bool VotesRow(std::size_t aux_id, std::size_t fit_count, bool all) { return all || aux_id >= fit_count; }

}  // namespace

DotAttackResult RunDotAttack(const ParamAttackInputs& in, const ForgetTask& truth, DotScreen screen,
                             const ParamAttackConfig& cfg) {
  DotAttackResult r;
  r.features = DotFeatures(in.target_head, in.aux, &truth, cfg.cosine);
  if (screen == DotScreen::kKMeans) {
    std::vector<double> scores;
    for (const DotRow& row : r.features) scores.push_back(row.value);
    r.kmeans = KMeans1d(scores);
    for (std::size_t i = 0; i < r.features.size(); ++i) {
      r.votes.push_back({r.features[i].class_id, r.kmeans->cluster[i] == 0 ? 1 : 0});
    }
  } else {
    const std::size_t fit = FitCount(cfg);
    const bool all = fit >= cfg.aux.models_per_class;
    std::vector<double> scores;
    std::vector<int> labels;
    for (const DotRow& row : r.features) {
      if (!FitsRow(row.aux_id, fit, all)) continue;
      scores.push_back(row.value);
      labels.push_back(row.label);
    }
    r.youden = YoudenThreshold(scores, labels);
    for (const DotRow& row : r.features) {
      if (!VotesRow(row.aux_id, fit, all)) continue;
      r.votes.push_back({row.class_id, YoudenPredict(*r.youden, row.value)});
    }
  }
  r.predicted = InferForgotten(r.votes);
  return r;
}

DiffAttackResult RunDiffAttack(const ParamAttackInputs& in, const ForgetTask& truth,
                               const ParamAttackConfig& cfg) {
  DiffAttackResult r;
  r.features = DiffFeatures(in.target_head, in.aux, &truth);
  const std::size_t fit = FitCount(cfg);
  const bool all = fit >= cfg.aux.models_per_class;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (const DiffRow& row : r.features) {
    if (!FitsRow(row.aux_id, fit, all)) continue;
    rows.push_back(row.diff);
    labels.push_back(row.label);
  }
  r.tree = DecisionTree::Fit(rows, labels, cfg.tree_depth);
  for (const DiffRow& row : r.features) {
    if (!VotesRow(row.aux_id, fit, all)) continue;
    r.votes.push_back({row.class_id, r.tree->Predict(row.diff)});
  }
  r.predicted = InferForgotten(r.votes);
  return r;
}

namespace {

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot open {} for writing", path.string()));
  return out;
}

}  // namespace

void WriteDotFeatures(const std::filesystem::path& path, const DotFeatureSet& rows) {
  std::ofstream out = OpenForWrite(path);
  out << "class_id,aux_id,value_or_vector_path,label\n";
  for (const DotRow& r : rows) out << fmt::format("{},{},{},{}\n", r.class_id, r.aux_id, r.value, r.label);
}

void WriteDiffFeatures(const std::filesystem::path& path, const DiffFeatureSet& rows) {
  std::filesystem::path vec_path = path;
  vec_path.replace_extension(".vectors.csv");
  std::ofstream out = OpenForWrite(path);
  std::ofstream vec = OpenForWrite(vec_path);
  out << "class_id,aux_id,value_or_vector_path,label\n";
  const std::string vec_name = vec_path.filename().string();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const DiffRow& r = rows[i];
    out << fmt::format("{},{},{}#{},{}\n", r.class_id, r.aux_id, vec_name, i, r.label);
    vec << fmt::format("{}\n", fmt::join(r.diff, ","));
  }
}

}  // namespace ulk
