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

#ifndef ULK_UNLEARN_TRAIN_H_
#define ULK_UNLEARN_TRAIN_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ulk/data/dataset.h"
#include "ulk/nn/autodiff.h"
#include "ulk/nn/model.h"

namespace ulk {

enum class Optimizer { kSgd, kSgdMomentum };

// kClassGrouped builds every minibatch from a single class (batch order is
// still shuffled), which lets the amnesiac ledger attribute updates to
// classes without flagging nearly every batch.
enum class Batching { kShuffled, kClassGrouped };

struct TrainConfig {
  int epochs = 20;
  double lr = 0.05;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  Optimizer optimizer = Optimizer::kSgd;
  double momentum = 0.9;
  Batching batching = Batching::kShuffled;
  Direction direction = Direction::kDescent;

  // lr > 0, batch_size >= 1, epochs >= 1 (>= 0 when allow_zero_epochs).
  void Validate(bool allow_zero_epochs = false) const;
  std::string Describe() const;
};

struct LedgerEntry {
  std::uint64_t batch_id = 0;
  std::vector<int> labels;  // distinct labels present in the batch, sorted
  ParamSet delta;
};

// Ordered per-batch parameter deltas recorded during training. Initial
// parameters plus the sum of all deltas reproduce the final parameters.
class UpdateLedger {
 public:
  UpdateLedger() = default;
  UpdateLedger(ModelSpec spec, ParamSet initial) : spec_(std::move(spec)), initial_(std::move(initial)) {}

  void Append(LedgerEntry entry) { entries_.push_back(std::move(entry)); }
  void Seal(std::uint64_t final_param_hash) { final_hash_ = final_param_hash; }

  const ModelSpec& spec() const { return spec_; }
  const ParamSet& initial() const { return initial_; }
  const std::vector<LedgerEntry>& entries() const { return entries_; }
  std::uint64_t final_hash() const { return final_hash_; }

  // One flag per entry: the batch held at least one sample of `classes`.
  std::vector<bool> FlagsFor(const std::vector<int>& classes) const;
  // Sum of deltas whose flag is set, accumulated in ledger order.
  ParamSet SumDeltas(const std::vector<bool>& flags) const;

  std::vector<std::uint8_t> Encode() const;
  static UpdateLedger Decode(std::span<const std::uint8_t> bytes);
  void Save(const std::filesystem::path& path) const;
  static UpdateLedger Load(const std::filesystem::path& path);

 private:
  ModelSpec spec_;
  ParamSet initial_;
  std::vector<LedgerEntry> entries_;
  std::uint64_t final_hash_ = 0;
};

struct TrainAudit {
  std::vector<std::size_t> label_counts;  // samples batched, per label
  std::size_t batches = 0;
};

struct TrainResult {
  ModelArtifact model;
  TrainAudit audit;
  std::optional<UpdateLedger> ledger;
  std::vector<double> epoch_loss;  // mean batch loss per epoch
  int epochs_run = 0;
};

struct TrainOptions {
  bool record_ledger = false;
  // Called after each epoch; returning true stops training.
  std::function<bool(int epoch, const ModelArtifact&)> after_epoch;
};

// Minibatch SGD on mean cross-entropy. Frozen feature layers are evaluated
// once up front and only the head is trained.
TrainResult Train(const ModelArtifact& init, const LabeledDataset& data, const TrainConfig& config,
                  const TrainOptions& options = {});

// Fraction of samples whose argmax logit equals the label; NaN when empty.
double Accuracy(const ModelArtifact& model, const LabeledDataset& data);
double MeanCrossEntropy(const ModelArtifact& model, const LabeledDataset& data);

}  // namespace ulk

#endif  // ULK_UNLEARN_TRAIN_H_
