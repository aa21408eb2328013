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

#ifndef ULK_UNLEARN_METHODS_H_
#define ULK_UNLEARN_METHODS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "ulk/data/dataset.h"
#include "ulk/nn/model.h"
#include "ulk/unlearn/train.h"

namespace ulk {

enum class UnlearnMethod { kRetrain, kFineTune, kRandomLabel, kAmnesiac, kNegativeGradient };

// "RT", "FT", "RL", "AU", "NG".
std::string MethodTag(UnlearnMethod method);
// Accepts the tags in either case.
UnlearnMethod ParseMethod(const std::string& text);
const std::vector<UnlearnMethod>& AllMethods();

struct UnlearnConfig {
  TrainConfig base;  // also the from-scratch config for retraining

  int ft_epochs = 10;
  double ft_lr_multiplier = 10.0;

  int rl_epochs = 3;
  double rl_lr_multiplier = 1.0;

  int ng_max_epochs = 200;
  double ng_lr_multiplier = 1.0;
  double ng_stop_accuracy = 0.05;
  bool ng_full_batch = true;

  std::string Describe() const;
  std::uint64_t Hash() const;
};

struct UnlearnedModel {
  ModelArtifact model;
  UnlearnMethod method = UnlearnMethod::kRetrain;
  std::uint64_t config_hash = 0;
  TrainAudit audit;
  int epochs_run = 0;
};

// Fresh initialization trained on D_rest only. The audit counts every label
// that was batched.
UnlearnedModel Retrain(const ModelSpec& spec, const LabeledDataset& rest, const UnlearnConfig& config);

// Continues from `model` on D_rest with lr * ft_lr_multiplier.
UnlearnedModel FineTune(const ModelArtifact& model, const LabeledDataset& rest,
                        const UnlearnConfig& config);

// Relabels every forget sample uniformly over the T-1 wrong classes, then
// continues training on D_rest plus the relabeled samples.
UnlearnedModel RandomLabel(const ModelArtifact& model, const LabeledDataset& rest,
                           const LabeledDataset& unlearn, const UnlearnConfig& config);
// The relabeling step on its own.
std::vector<int> RandomWrongLabels(const LabeledDataset& unlearn, std::uint64_t seed);

// Subtracts the ledger deltas of every batch that contained a forget class.
// Throws LedgerMismatchError if the ledger was not recorded for `model`.
UnlearnedModel Amnesiac(const ModelArtifact& model, const UpdateLedger& ledger,
                        const ForgetTask& task);
// Subtracts the deltas selected by `flags`.
ModelArtifact SubtractLedger(const ModelArtifact& model, const UpdateLedger& ledger,
                             const std::vector<bool>& flags);

// Gradient ascent on D_unlearn until accuracy on it drops below
// ng_stop_accuracy or the epoch cap is reached.
UnlearnedModel NegativeGradient(const ModelArtifact& model, const LabeledDataset& unlearn,
                                const UnlearnConfig& config);

// Dispatches on `method`. `ledger` is required for kAmnesiac only.
UnlearnedModel Unlearn(UnlearnMethod method, const ModelArtifact& original, const UpdateLedger* ledger,
                       const LabeledDataset& train, const ForgetTask& task, const UnlearnConfig& config);

}  // namespace ulk

#endif  // ULK_UNLEARN_METHODS_H_
