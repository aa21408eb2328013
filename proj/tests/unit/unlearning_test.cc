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

#include <gtest/gtest.h>

#include <cmath>

#include "support/bench.h"
#include "ulk/common/error.h"
#include "ulk/nn/autodiff.h"
#include "ulk/unlearn/methods.h"
#include "ulk/unlearn/train.h"

namespace ulk {
namespace {

constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

ForgetTask TaskFor(std::uint64_t seed) {
  const auto& t = bench::Original(seed);
  return t.cfg.Tasks(t.data.train.num_classes(), seed).front();
}

struct Accs {
  double forget_before, rest_before, forget_after, rest_after;
};

Accs Measure(std::uint64_t seed, const ModelArtifact& after, const ForgetTask& task) {
  const auto& t = bench::Original(seed);
  auto [rest, gone] = SplitForget(t.data.test, task);
  return {Accuracy(t.model, gone), Accuracy(t.model, rest), Accuracy(after, gone), Accuracy(after, rest)};
}

TEST(Train, LedgerTelescopesToFinalParams) {
  const auto& t = bench::Original(1);
  EXPECT_EQ(t.ledger.final_hash(), t.model.ParamHash());
  std::vector<bool> none(t.ledger.entries().size(), false);
  EXPECT_EQ(SubtractLedger(t.model, t.ledger, none).params(), t.model.params());
}

TEST(Train, LedgerEncodingRoundTrips) {
  const auto& t = bench::Original(1);
  UpdateLedger back = UpdateLedger::Decode(t.ledger.Encode());
  EXPECT_EQ(back.spec(), t.ledger.spec());
  EXPECT_EQ(back.initial(), t.ledger.initial());
  EXPECT_EQ(back.final_hash(), t.ledger.final_hash());
  ASSERT_EQ(back.entries().size(), t.ledger.entries().size());
  EXPECT_EQ(back.entries()[3].delta, t.ledger.entries()[3].delta);
  EXPECT_EQ(back.entries()[3].labels, t.ledger.entries()[3].labels);
}

TEST(Train, ClassGroupedBatchesHoldFewLabels) {
  const auto& t = bench::Original(1);
  std::size_t mixed = 0;
  for (const auto& e : t.ledger.entries()) mixed += e.labels.size() > 1;
  EXPECT_LT(mixed * 4, t.ledger.entries().size());
}

TEST(Train, DeterministicUnderFixedSeed) {
  const auto& t = bench::Original(2);
  TrainConfig tc = t.cfg.unlearn.base;
  tc.seed = 2;
  TrainResult again = Train(Build(t.model.spec(), 2), t.data.train, tc);
  EXPECT_EQ(again.model.params(), t.model.params());
}

TEST(Retrain, NeverSeesForgetLabelsAndForgets) {
  for (std::uint64_t seed : kSeeds) {
    ForgetTask task = TaskFor(seed);
    UnlearnedModel u = bench::Forget(seed, UnlearnMethod::kRetrain, task);
    for (int c : task.classes) EXPECT_EQ(u.audit.label_counts[static_cast<std::size_t>(c)], 0u);
    Accs a = Measure(seed, u.model, task);
    EXPECT_LE(a.forget_after, 0.33) << "seed " << seed;
    EXPECT_GE(a.rest_after, a.rest_before) << "seed " << seed;
  }
}

TEST(Retrain, Deterministic) {
  ForgetTask task = TaskFor(1);
  EXPECT_EQ(bench::Forget(1, UnlearnMethod::kRetrain, task).model.params(),
            bench::Forget(1, UnlearnMethod::kRetrain, task).model.params());
}

TEST(FineTune, ForgetsWhileKeepingRetainedAccuracy) {
  for (std::uint64_t seed : kSeeds) {
    ForgetTask task = TaskFor(seed);
    UnlearnedModel u = bench::Forget(seed, UnlearnMethod::kFineTune, task);
    Accs a = Measure(seed, u.model, task);
    EXPECT_LT(a.forget_after, 0.20) << "seed " << seed;
    EXPECT_GE(a.rest_after, a.rest_before - 0.02) << "seed " << seed;
  }
}

TEST(FineTune, ZeroEpochsIsIdentity) {
  const auto& t = bench::Original(1);
  UnlearnConfig uc = t.cfg.unlearn;
  uc.ft_epochs = 0;
  auto [rest, gone] = SplitForget(t.data.train, TaskFor(1));
  EXPECT_EQ(FineTune(t.model, rest, uc).model.params(), t.model.params());
}

TEST(RandomLabel, RelabelingAvoidsTheTrueLabelAndIsSeeded) {
  const auto& t = bench::Original(1);
  auto [rest, gone] = SplitForget(t.data.train, ForgetTask::Of({0, 4}));
  std::vector<int> a = RandomWrongLabels(gone, 9);
  std::vector<int> b = RandomWrongLabels(gone, 9);
  std::vector<int> c = RandomWrongLabels(gone, 10);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  std::vector<std::size_t> hist(10, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NE(a[i], gone.label(i));
    EXPECT_GE(a[i], 0);
    EXPECT_LT(a[i], 10);
    ++hist[static_cast<std::size_t>(a[i])];
  }
  // 400 relabels over 9 wrong classes each: every class should be used.
  for (std::size_t k = 0; k < 10; ++k) EXPECT_GT(hist[k], 0u);
}

TEST(RandomLabel, ForgetAccuracyNearZero) {
  for (std::uint64_t seed : kSeeds) {
    ForgetTask task = TaskFor(seed);
    Accs a = Measure(seed, bench::Forget(seed, UnlearnMethod::kRandomLabel, task).model, task);
    EXPECT_LE(a.forget_after, 0.05) << "seed " << seed;
  }
}

TEST(Amnesiac, SubtractingEverythingRecoversInitialization) {
  const auto& t = bench::Original(3);
  std::vector<bool> all(t.ledger.entries().size(), true);
  ModelArtifact back = SubtractLedger(t.model, t.ledger, all);
  const ParamSet& init = t.ledger.initial();
  for (std::size_t l = 0; l < init.size(); ++l) {
    for (std::size_t j = 0; j < init[l].size(); ++j) {
      for (std::size_t i = 0; i < init[l][j].size(); ++i) {
        ASSERT_NEAR(back.params()[l][j][i], init[l][j][i], 1e-9);
      }
    }
  }
}

TEST(Amnesiac, ForgetAccuracyAtMostFivePercent) {
  for (std::uint64_t seed : kSeeds) {
    ForgetTask task = TaskFor(seed);
    Accs a = Measure(seed, bench::Forget(seed, UnlearnMethod::kAmnesiac, task).model, task);
    EXPECT_LE(a.forget_after, 0.05) << "seed " << seed;
  }
}

TEST(Amnesiac, RejectsForeignLedger) {
  const auto& a = bench::Original(1);
  const auto& b = bench::Original(2);
  EXPECT_THROW(Amnesiac(a.model, b.ledger, ForgetTask::Of({1})), LedgerMismatchError);
  EXPECT_THROW(Unlearn(UnlearnMethod::kAmnesiac, a.model, nullptr, a.data.train, ForgetTask::Of({1}),
                       a.cfg.unlearn),
               InvalidArgument);
}

TEST(NegativeGradient, FirstFullBatchStepRaisesUnlearnLoss) {
  for (std::uint64_t seed : kSeeds) {
    const auto& t = bench::Original(seed);
    auto [rest, gone] = SplitForget(t.data.train, TaskFor(seed));
    UnlearnConfig uc = t.cfg.unlearn;
    uc.ng_max_epochs = 1;
    double before = MeanCrossEntropy(t.model, gone);
    UnlearnedModel u = NegativeGradient(t.model, gone, uc);
    EXPECT_EQ(u.epochs_run, 1);
    EXPECT_GE(MeanCrossEntropy(u.model, gone), before) << "seed " << seed;
  }
}

TEST(NegativeGradient, OneStepMatchesClosedForm) {
  ModelArtifact m = Build(ModelSpec::Mlp({1, 1, 2}), 1);
  ParamSet p = m.params();
  p[0][0][0] = 0.5;   // hidden weight
  p[0][1][0] = 0.1;   // hidden bias
  p[2][0] = Tensor({2, 1}, std::vector<double>{1.0, -1.0});
  p[2][1] = Tensor({2}, std::vector<double>{0.0, 0.0});
  m = m.WithParams(p);
  LabeledDataset one({1}, 2, {1.0}, {0}, "toy");
  UnlearnConfig uc;
  uc.base.lr = 0.1;
  uc.ng_max_epochs = 1;
  UnlearnedModel u = NegativeGradient(m, one, uc);

  const double x = 1.0;
  const double h = 0.5 * x + 0.1;
  const double p0 = 1.0 / (1.0 + std::exp(-2.0 * h));  // logits (h, -h)
  const double e0 = p0 - 1.0;
  const double e1 = 1.0 - p0;
  const double dh = e0 * 1.0 + e1 * -1.0;
  const double lr = 0.1;
  const ParamSet& q = u.model.params();
  EXPECT_NEAR(q[2][0][0], 1.0 + lr * e0 * h, 1e-12);
  EXPECT_NEAR(q[2][0][1], -1.0 + lr * e1 * h, 1e-12);
  EXPECT_NEAR(q[2][1][0], lr * e0, 1e-12);
  EXPECT_NEAR(q[2][1][1], lr * e1, 1e-12);
  EXPECT_NEAR(q[0][0][0], 0.5 + lr * dh * x, 1e-12);
  EXPECT_NEAR(q[0][1][0], 0.1 + lr * dh, 1e-12);
}

TEST(NegativeGradient, StopsOnceForgetAccuracyIsLow) {
  for (std::uint64_t seed : kSeeds) {
    const auto& t = bench::Original(seed);
    ForgetTask task = TaskFor(seed);
    auto [rest, gone] = SplitForget(t.data.train, task);
    UnlearnedModel u = bench::Forget(seed, UnlearnMethod::kNegativeGradient, task);
    EXPECT_LT(Accuracy(u.model, gone), t.cfg.unlearn.ng_stop_accuracy);
    EXPECT_LT(u.epochs_run, t.cfg.unlearn.ng_max_epochs);
    Accs a = Measure(seed, u.model, task);
    // Retained-accuracy loss is reported, not asserted.
    RecordProperty("rest_drop_seed_" + std::to_string(seed), std::to_string(a.rest_before - a.rest_after));
  }
}

TEST(Methods, TagsRoundTrip) {
  for (UnlearnMethod m : AllMethods()) EXPECT_EQ(ParseMethod(MethodTag(m)), m);
  EXPECT_EQ(ParseMethod("rt"), UnlearnMethod::kRetrain);
  EXPECT_THROW(ParseMethod("xx"), InvalidArgument);
}

TEST(Methods, ConfigHashCoversSettings) {
  UnlearnConfig a;
  UnlearnConfig b;
  b.ft_lr_multiplier = 4.0;
  EXPECT_NE(a.Hash(), b.Hash());
  EXPECT_EQ(a.Hash(), UnlearnConfig{}.Hash());
}

}  // namespace
}  // namespace ulk
