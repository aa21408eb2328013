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

#include "ulk/unlearn/methods.h"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "ulk/common/error.h"
#include "ulk/common/hash.h"
#include "ulk/common/rng.h"

namespace ulk {

std::string MethodTag(UnlearnMethod method) {
  switch (method) {
    case UnlearnMethod::kRetrain: return "RT";
    case UnlearnMethod::kFineTune: return "FT";
    case UnlearnMethod::kRandomLabel: return "RL";
    case UnlearnMethod::kAmnesiac: return "AU";
    case UnlearnMethod::kNegativeGradient: return "NG";
  }
  return "RT";
}

UnlearnMethod ParseMethod(const std::string& text) {
  std::string t = text;
  for (char& c : t) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (UnlearnMethod m : AllMethods()) {
    if (MethodTag(m) == t) return m;
  }
  throw InvalidArgument("unknown unlearning method '" + text + "' (expected rt|ft|rl|au|ng)");
}

const std::vector<UnlearnMethod>& AllMethods() {
  static const std::vector<UnlearnMethod> all = {
      UnlearnMethod::kRetrain, UnlearnMethod::kFineTune, UnlearnMethod::kRandomLabel,
      UnlearnMethod::kAmnesiac, UnlearnMethod::kNegativeGradient};
  return all;
}

std::string UnlearnConfig::Describe() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                " ft_epochs=%d ft_mult=%.17g rl_epochs=%d rl_mult=%.17g ng_epochs=%d "
                "ng_mult=%.17g ng_stop=%.17g ng_full=%d",
                ft_epochs, ft_lr_multiplier, rl_epochs, rl_lr_multiplier, ng_max_epochs,
                ng_lr_multiplier, ng_stop_accuracy, ng_full_batch ? 1 : 0);
  return base.Describe() + buf;
}

std::uint64_t UnlearnConfig::Hash() const {
  Fnv1a h;
  h.Update(Describe());
  return h.digest();
}

namespace {

UnlearnedModel Wrap(TrainResult result, UnlearnMethod method, const UnlearnConfig& config) {
  UnlearnedModel out{result.model.WithProvenance(Provenance::Unlearned(MethodTag(method))), method,
                     config.Hash(), std::move(result.audit), result.epochs_run};
  return out;
}

}  // namespace

UnlearnedModel Retrain(const ModelSpec& spec, const LabeledDataset& rest, const UnlearnConfig& config) {
  if (rest.empty()) throw InvalidArgument("retrain: D_rest is empty");
  config.base.Validate();
  ModelArtifact init = Build(spec, config.base.seed);
  TrainConfig cfg = config.base;
  cfg.seed = Rng(config.base.seed).Split(0x7274).NextU64();
  return Wrap(Train(init, rest, cfg), UnlearnMethod::kRetrain, config);
}

UnlearnedModel FineTune(const ModelArtifact& model, const LabeledDataset& rest,
                        const UnlearnConfig& config) {
  TrainConfig cfg = config.base;
  cfg.epochs = config.ft_epochs;
  cfg.lr = config.base.lr * config.ft_lr_multiplier;
  cfg.seed = Rng(config.base.seed).Split(0x6674).NextU64();
  cfg.Validate(/*allow_zero_epochs=*/true);
  if (cfg.epochs > 0 && rest.empty()) throw InvalidArgument("fine-tune: D_rest is empty");
  return Wrap(Train(model, rest, cfg), UnlearnMethod::kFineTune, config);
}

std::vector<int> RandomWrongLabels(const LabeledDataset& unlearn, std::uint64_t seed) {
  const auto t = static_cast<std::uint64_t>(unlearn.num_classes());
  Rng rng = Rng(seed).Split(0x726c);
  std::vector<int> labels(unlearn.size());
  for (std::size_t i = 0; i < unlearn.size(); ++i) {
    auto truth = static_cast<std::uint64_t>(unlearn.label(i));
    std::uint64_t r = rng.Below(t - 1);
    labels[i] = static_cast<int>(r >= truth ? r + 1 : r);
  }
  return labels;
}

UnlearnedModel RandomLabel(const ModelArtifact& model, const LabeledDataset& rest,
                           const LabeledDataset& unlearn, const UnlearnConfig& config) {
  LabeledDataset relabeled = unlearn.WithLabels(RandomWrongLabels(unlearn, config.base.seed), "relabeled");
  LabeledDataset mixed = LabeledDataset::Concat(rest, relabeled, "rest+relabeled");
  TrainConfig cfg = config.base;
  cfg.epochs = config.rl_epochs;
  cfg.lr = config.base.lr * config.rl_lr_multiplier;
  cfg.seed = Rng(config.base.seed).Split(0x726d).NextU64();
  cfg.Validate();
  return Wrap(Train(model, mixed, cfg), UnlearnMethod::kRandomLabel, config);
}

ModelArtifact SubtractLedger(const ModelArtifact& model, const UpdateLedger& ledger,
                             const std::vector<bool>& flags) {
  if (!(ledger.spec() == model.spec()) || ledger.final_hash() != model.ParamHash()) {
    throw LedgerMismatchError("ledger was not recorded for this model (hash " +
                              HexDigest(ledger.final_hash()) + " vs " +
                              HexDigest(model.ParamHash()) + ")");
  }
  ParamSet removed = ledger.SumDeltas(flags);
  ParamSet params = model.params();
  for (std::size_t l = 0; l < params.size(); ++l) {
    for (std::size_t j = 0; j < params[l].size(); ++j) {
      auto p = params[l][j].values();
      auto d = removed[l][j].values();
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= d[i];
    }
  }
  return model.WithParams(std::move(params));
}

UnlearnedModel Amnesiac(const ModelArtifact& model, const UpdateLedger& ledger,
                        const ForgetTask& task) {
  task.Validate(model.spec().num_classes);
  std::vector<bool> flags = ledger.FlagsFor(task.classes);
  ModelArtifact out = SubtractLedger(model, ledger, flags);
  // Identifies the subtraction: which ledger and which entries.
  Fnv1a h;
  h.Update("AU");
  h.Update(HexDigest(ledger.final_hash()));
  for (bool f : flags) h.Update(f ? "1" : "0");
  return UnlearnedModel{out.WithProvenance(Provenance::Unlearned("AU")), UnlearnMethod::kAmnesiac,
                        h.digest(), {}, 0};
}

UnlearnedModel NegativeGradient(const ModelArtifact& model, const LabeledDataset& unlearn,
                                const UnlearnConfig& config) {
  if (unlearn.empty()) throw InvalidArgument("negative gradient: D_unlearn is empty");
  TrainConfig cfg = config.base;
  cfg.epochs = config.ng_max_epochs;
  cfg.lr = config.base.lr * config.ng_lr_multiplier;
  cfg.direction = Direction::kAscent;
  cfg.optimizer = Optimizer::kSgd;
  cfg.batching = Batching::kShuffled;
  if (config.ng_full_batch) cfg.batch_size = unlearn.size();
  cfg.seed = Rng(config.base.seed).Split(0x6e67).NextU64();
  cfg.Validate();
  if (Accuracy(model, unlearn) < config.ng_stop_accuracy) {
    TrainConfig none = cfg;
    none.epochs = 0;
    return Wrap(Train(model, unlearn, none), UnlearnMethod::kNegativeGradient, config);
  }
  TrainOptions options;
  options.after_epoch = [&](int, const ModelArtifact& current) {
    return Accuracy(current, unlearn) < config.ng_stop_accuracy;
  };
  return Wrap(Train(model, unlearn, cfg, options), UnlearnMethod::kNegativeGradient, config);
}

UnlearnedModel Unlearn(UnlearnMethod method, const ModelArtifact& original, const UpdateLedger* ledger,
                       const LabeledDataset& train, const ForgetTask& task, const UnlearnConfig& config) {
  auto [rest, unlearn] = SplitForget(train, task);
  switch (method) {
    case UnlearnMethod::kRetrain: return Retrain(original.spec(), rest, config);
    case UnlearnMethod::kFineTune: return FineTune(original, rest, config);
    case UnlearnMethod::kRandomLabel: return RandomLabel(original, rest, unlearn, config);
    case UnlearnMethod::kAmnesiac:
      if (ledger == nullptr) throw InvalidArgument("amnesiac unlearning needs the training ledger");
      return Amnesiac(original, *ledger, task);
    case UnlearnMethod::kNegativeGradient: return NegativeGradient(original, unlearn, config);
  }
  throw InvalidArgument("unknown method");
}

}  // namespace ulk
