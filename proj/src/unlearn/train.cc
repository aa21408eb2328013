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

#include "ulk/unlearn/train.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "ulk/common/error.h"
#include "ulk/common/rng.h"
#include "ulk/nn/checkpoint.h"
#include "ulk/simd/kernels.h"

namespace ulk {

void TrainConfig::Validate(bool allow_zero_epochs) const {
  if (!(lr > 0.0)) throw InvalidArgument("train.lr must be positive");
  if (batch_size == 0) throw InvalidArgument("train.batch must be at least 1");
  if (epochs < (allow_zero_epochs ? 0 : 1)) throw InvalidArgument("train.epochs too small");
  if (optimizer == Optimizer::kSgdMomentum && !(momentum >= 0.0 && momentum < 1.0)) {
    throw InvalidArgument("momentum must be in [0,1)");
  }
}

std::string TrainConfig::Describe() const {
  std::string s = "epochs=" + std::to_string(epochs);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", lr);
  s += " lr=" + std::string(buf);
  s += " batch=" + std::to_string(batch_size);
  s += " seed=" + std::to_string(seed);
  s += optimizer == Optimizer::kSgd ? " opt=sgd" : " opt=sgd-momentum";
  if (optimizer == Optimizer::kSgdMomentum) {
    std::snprintf(buf, sizeof buf, "%.17g", momentum);
    s += " momentum=" + std::string(buf);
  }
  s += batching == Batching::kShuffled ? " batching=shuffled" : " batching=class";
  s += direction == Direction::kDescent ? " dir=descent" : " dir=ascent";
  return s;
}

std::vector<bool> UpdateLedger::FlagsFor(const std::vector<int>& classes) const {
  std::vector<bool> flags(entries_.size(), false);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    for (int y : entries_[i].labels) {
      if (std::find(classes.begin(), classes.end(), y) != classes.end()) {
        flags[i] = true;
        break;
      }
    }
  }
  return flags;
}

ParamSet UpdateLedger::SumDeltas(const std::vector<bool>& flags) const {
  if (flags.size() != entries_.size()) throw InvalidArgument("flag count != ledger length");
  ParamSet sum = ZerosLike(initial_);
  for (std::size_t e = 0; e < entries_.size(); ++e) {
    if (!flags[e]) continue;
    const ParamSet& d = entries_[e].delta;
    for (std::size_t l = 0; l < sum.size(); ++l) {
      for (std::size_t j = 0; j < sum[l].size(); ++j) {
        auto src = d[l][j].values();
        auto dst = sum[l][j].values();
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
      }
    }
  }
  return sum;
}

namespace {

void WriteParams(ByteWriter& w, const ParamSet& params) {
  w.U32(static_cast<std::uint32_t>(params.size()));
  for (const auto& layer : params) {
    w.U32(static_cast<std::uint32_t>(layer.size()));
    for (const auto& t : layer) {
      w.U64(static_cast<std::uint64_t>(t.size()) * 8);
      for (double v : t.values()) w.F64(v);
    }
  }
}

ParamSet ReadParams(ByteReader& r, const std::vector<LayerDesc>& layers) {
  std::uint32_t n = r.U32();
  if (n != layers.size()) throw ByteCountError("ledger layer count disagrees with spec");
  ParamSet params(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t tensors = r.U32();
    if (tensors != layers[i].param_shapes.size()) throw ByteCountError("ledger tensor count mismatch");
    for (std::size_t j = 0; j < tensors; ++j) {
      const Shape& shape = layers[i].param_shapes[j];
      std::uint64_t bytes = r.U64();
      if (bytes != NumElements(shape) * 8) throw ByteCountError("ledger tensor byte count mismatch");
      std::vector<double> data(NumElements(shape));
      for (double& v : data) v = r.F64();
      params[i].emplace_back(shape, std::move(data));
    }
  }
  return params;
}

}  // namespace

std::vector<std::uint8_t> UpdateLedger::Encode() const {
  ByteWriter w;
  w.Text("ULKL");
  w.U16(1);
  std::string desc = spec_.Describe();
  w.U32(static_cast<std::uint32_t>(desc.size()));
  w.Text(desc);
  w.U64(final_hash_);
  WriteParams(w, initial_);
  w.U64(entries_.size());
  for (const auto& e : entries_) {
    w.U64(e.batch_id);
    w.U32(static_cast<std::uint32_t>(e.labels.size()));
    for (int y : e.labels) w.U32(static_cast<std::uint32_t>(y));
    WriteParams(w, e.delta);
  }
  return std::move(w.buffer());
}

UpdateLedger UpdateLedger::Decode(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.Take(4);
  if (std::memcmp(magic.data(), "ULKL", 4) != 0) throw BadMagicError("not an update ledger");
  if (r.U16() != 1) throw VersionError("unsupported ledger version");
  std::uint32_t len = r.U32();
  auto desc = r.Take(len);
  ModelSpec spec = ParseModelSpec(std::string(desc.begin(), desc.end()));
  auto layers = Layout(spec);
  std::uint64_t final_hash = r.U64();
  UpdateLedger ledger(spec, ReadParams(r, layers));
  std::uint64_t count = r.U64();
  for (std::uint64_t i = 0; i < count; ++i) {
    LedgerEntry e;
    e.batch_id = r.U64();
    std::uint32_t nl = r.U32();
    for (std::uint32_t j = 0; j < nl; ++j) e.labels.push_back(static_cast<int>(r.U32()));
    e.delta = ReadParams(r, layers);
    ledger.Append(std::move(e));
  }
  if (r.remaining() != 0) throw ByteCountError("trailing bytes after ledger");
  ledger.Seal(final_hash);
  return ledger;
}

void UpdateLedger::Save(const std::filesystem::path& path) const { WriteFileBytes(path, Encode()); }

UpdateLedger UpdateLedger::Load(const std::filesystem::path& path) {
  return Decode(ReadFileBytes(path));
}

namespace {

std::vector<std::vector<std::size_t>> MakeBatches(const LabeledDataset& data,
                                                  const TrainConfig& config, Rng& rng) {
  std::vector<std::vector<std::size_t>> batches;
  if (config.batching == Batching::kShuffled) {
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.Shuffle(std::span<std::size_t>(order));
    for (std::size_t i = 0; i < order.size(); i += config.batch_size) {
      std::size_t end = std::min(order.size(), i + config.batch_size);
      batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                           order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
  }
  for (std::size_t c = 0; c < data.num_classes(); ++c) {
    auto idx = data.IndicesOfClass(static_cast<int>(c));
    rng.Shuffle(std::span<std::size_t>(idx));
    for (std::size_t i = 0; i < idx.size(); i += config.batch_size) {
      std::size_t end = std::min(idx.size(), i + config.batch_size);
      batches.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(i),
                           idx.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  rng.Shuffle(std::span<std::vector<std::size_t>>(batches));
  return batches;
}

}  // namespace

TrainResult Train(const ModelArtifact& init, const LabeledDataset& data, const TrainConfig& config,
                  const TrainOptions& options) {
  config.Validate(/*allow_zero_epochs=*/true);
  if (data.num_classes() != init.spec().num_classes) {
    throw InvalidArgument("dataset class count does not match model");
  }
  TrainResult result{init, {}, std::nullopt, {}, 0};
  result.audit.label_counts.assign(data.num_classes(), 0);
  if (config.epochs == 0) return result;
  if (data.empty()) throw InvalidArgument("cannot train on an empty dataset");

  // With a frozen extractor the head sees fixed features; compute them once.
  std::size_t first_layer = 0;
  std::vector<double> features;
  std::size_t feature_size = data.sample_size();
  if (init.features_frozen()) {
    first_layer = init.feature_boundary();
    feature_size = NumElements(init.layers()[first_layer].in_shape);
    features.reserve(data.size() * feature_size);
    for (std::size_t i = 0; i < data.size(); ++i) {
      Tensor f = ForwardRange(init, 0, first_layer, data.sample(i));
      features.insert(features.end(), f.values().begin(), f.values().end());
    }
  }
  std::span<const double> source = init.features_frozen() ? std::span<const double>(features)
                                                          : data.values();

  if (options.record_ledger) result.ledger.emplace(init.spec(), init.params());
  const std::vector<bool> trainable = init.TrainableMask();
  ParamSet params = init.params();
  ParamSet velocity;
  if (config.optimizer == Optimizer::kSgdMomentum) velocity = ZerosLike(params);

  Rng rng(config.seed);
  std::vector<double> batch_inputs;
  std::vector<int> batch_labels;
  std::uint64_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng epoch_rng = rng.Split(static_cast<std::uint64_t>(epoch));
    auto batches = MakeBatches(data, config, epoch_rng);
    double loss_sum = 0.0;
    for (const auto& batch : batches) {
      batch_inputs.clear();
      batch_labels.clear();
      for (std::size_t i : batch) {
        auto s = source.subspan(i * feature_size, feature_size);
        batch_inputs.insert(batch_inputs.end(), s.begin(), s.end());
        batch_labels.push_back(data.label(i));
        ++result.audit.label_counts[static_cast<std::size_t>(data.label(i))];
      }
      ModelArtifact current = init.WithParams(params);
      BatchGrad bg = GradParams(current, Batch{batch_inputs, feature_size, batch_labels, first_layer});
      loss_sum += bg.mean_loss;
      const ParamSet* step_grads = &bg.grads.param_grads;
      if (config.optimizer == Optimizer::kSgdMomentum) {
        for (std::size_t l = 0; l < velocity.size(); ++l) {
          for (std::size_t j = 0; j < velocity[l].size(); ++j) {
            auto v = velocity[l][j].values();
            auto g = bg.grads.param_grads[l][j].values();
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = config.momentum * v[i] + g[i];
          }
        }
        step_grads = &velocity;
      }
      UpdateResult upd = ApplyUpdate(params, *step_grads, config.lr, config.direction, trainable);
      params = std::move(upd.params);
      if (result.ledger) {
        LedgerEntry entry;
        entry.batch_id = step;
        entry.labels = batch_labels;
        std::sort(entry.labels.begin(), entry.labels.end());
        entry.labels.erase(std::unique(entry.labels.begin(), entry.labels.end()), entry.labels.end());
        entry.delta = std::move(upd.delta);
        result.ledger->Append(std::move(entry));
      }
      ++step;
      ++result.audit.batches;
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(batches.size()));
    result.epochs_run = epoch + 1;
    if (options.after_epoch) {
      if (options.after_epoch(epoch, init.WithParams(params))) break;
    }
  }
  result.model = init.WithParams(std::move(params));
  if (result.ledger) result.ledger->Seal(result.model.ParamHash());
  return result;
}

double Accuracy(const ModelArtifact& model, const LabeledDataset& data) {
  if (data.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    Tensor logits = Forward(model, data.sample(i));
    auto best = std::max_element(logits.values().begin(), logits.values().end()) -
                logits.values().begin();
    if (best == data.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

double MeanCrossEntropy(const ModelArtifact& model, const LabeledDataset& data) {
  if (data.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    Tensor logits = Forward(model, data.sample(i));
    sum += SoftmaxCrossEntropy(logits.values(), static_cast<std::size_t>(data.label(i))).loss;
  }
  return sum / static_cast<double>(data.size());
}

}  // namespace ulk
