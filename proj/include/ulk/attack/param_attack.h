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

#ifndef ULK_ATTACK_PARAM_ATTACK_H_
#define ULK_ATTACK_PARAM_ATTACK_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ulk/attack/classifiers.h"
#include "ulk/data/dataset.h"
#include "ulk/nn/model.h"
#include "ulk/unlearn/train.h"

namespace ulk {

struct AuxConfig {
  std::size_t subset_size = 20;       // samples per auxiliary model
  std::size_t models_per_class = 50;  // auxiliary models per class
  std::uint64_t seed = 7;
  TrainConfig train{.epochs = 60, .lr = 0.1, .batch_size = 20};
  bool include_bias = true;
};

struct AuxHead {
  ParameterVector head;
  int class_id = 0;
  std::size_t aux_id = 0;  // index within its class
};

// Trains one frozen-feature clone of `target` per subset and returns the
// resulting head vectors in subset order.
std::vector<AuxHead> TrainAuxModels(const ModelArtifact& target, const LabeledDataset& pool,
                                    std::span<const ClassSubset> subsets, const AuxConfig& cfg);

// Row label: 1 for unlearn candidates, 0 for rest candidates. Unknown (-1)
// when no forget task is supplied.
struct DotRow {
  double value = 0.0;
  int label = -1;
  int class_id = 0;
  std::size_t aux_id = 0;
};
using DotFeatureSet = std::vector<DotRow>;

struct DiffRow {
  std::vector<double> diff;
  int label = -1;
  int class_id = 0;
  std::size_t aux_id = 0;
};
using DiffFeatureSet = std::vector<DiffRow>;

DotFeatureSet DotFeatures(const ParameterVector& w_rest, std::span<const AuxHead> aux,
                          const ForgetTask* truth = nullptr, bool cosine = false);
DiffFeatureSet DiffFeatures(const ParameterVector& w_rest, std::span<const AuxHead> aux,
                            const ForgetTask* truth = nullptr);

struct RowVote {
  int class_id = 0;
  int predicted = 0;
};

// Per-class majority vote over row predictions. A class is reported when more
// than half of its rows vote 1; exact ties are excluded.
std::vector<int> InferForgotten(std::span<const RowVote> votes);

enum class DotScreen { kYouden, kKMeans };

struct ParamAttackConfig {
  AuxConfig aux;
  bool cosine = false;
  std::size_t tree_depth = 4;
  // Supervised screeners fit on aux ids below this fraction of
  // models_per_class and vote with the rest. 1.0 fits and votes on all rows.
  double fit_fraction = 0.5;
};

struct ParamAttackInputs {
  ParameterVector target_head;
  std::vector<AuxHead> aux;
};

// The expensive shared part: subsets of the attacker's pool and aux heads
// trained against `target`.
ParamAttackInputs PrepareParamAttack(const ModelArtifact& target, const LabeledDataset& pool,
                                     const ParamAttackConfig& cfg);

struct DotAttackResult {
  DotFeatureSet features;
  std::vector<int> predicted;
  std::vector<RowVote> votes;
  std::optional<YoudenResult> youden;
  std::optional<KMeans1dResult> kmeans;
};

struct DiffAttackResult {
  DiffFeatureSet features;
  std::vector<int> predicted;
  std::vector<RowVote> votes;
  std::optional<DecisionTree> tree;
};

// `truth` supplies the oracle row labels that Youden and the tree are fit on;
// k-means ignores it.
DotAttackResult RunDotAttack(const ParamAttackInputs& in, const ForgetTask& truth, DotScreen screen,
                             const ParamAttackConfig& cfg);
DiffAttackResult RunDiffAttack(const ParamAttackInputs& in, const ForgetTask& truth,
                               const ParamAttackConfig& cfg);

// Feature CSV: class_id,aux_id,value_or_vector_path,label. Difference vectors
// go to a sibling file (one vector per line) referenced as "<file>#<row>".
void WriteDotFeatures(const std::filesystem::path& path, const DotFeatureSet& rows);
void WriteDiffFeatures(const std::filesystem::path& path, const DiffFeatureSet& rows);

}  // namespace ulk

#endif  // ULK_ATTACK_PARAM_ATTACK_H_
