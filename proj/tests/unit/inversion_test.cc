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

#include <algorithm>
#include <cmath>

#include "support/bench.h"
#include "ulk/attack/inversion.h"
#include "ulk/common/error.h"

namespace ulk {
namespace {

std::size_t Argmax(const std::vector<double>& p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

class UniformOracle : public QueryOracle {
 public:
  explicit UniformOracle(std::size_t d, std::size_t t) : d_(d), t_(t) {}
  std::size_t input_size() const override { return d_; }
  std::size_t num_classes() const override { return t_; }

 protected:
  std::vector<double> Answer(std::span<const double>) override {
    return std::vector<double>(t_, 1.0 / static_cast<double>(t_));
  }

 private:
  std::size_t d_;
  std::size_t t_;
};

// Forwards to a model oracle and records whether every query stayed in [0,1]^d.
class CheckingOracle : public QueryOracle {
 public:
  explicit CheckingOracle(ModelOracle& inner) : inner_(inner) {}
  std::size_t input_size() const override { return inner_.input_size(); }
  std::size_t num_classes() const override { return inner_.num_classes(); }
  bool all_in_box = true;

 protected:
  std::vector<double> Answer(std::span<const double> x) override {
    for (double v : x) all_in_box = all_in_box && v >= 0.0 && v <= 1.0;
    return inner_.Query(x);
  }

 private:
  ModelOracle& inner_;
};

TEST(Whitebox, TrainedModelYieldsConfidentInversions) {
  const auto& t = bench::Original(1);
  IpvSet set = BuildIpvSetWhitebox(t.model, t.cfg.whitebox);
  ASSERT_EQ(set.size(), 10u);
  for (std::size_t c = 0; c < set.size(); ++c) {
    EXPECT_EQ(set[c].target, c);
    EXPECT_GE(set[c].max_prob, 0.95) << "class " << c;
    EXPECT_EQ(Argmax(set[c].probs), c);
    EXPECT_NO_THROW(ValidateIpv(set[c]));
  }
}

TEST(Whitebox, RetrainedForgottenClassHasLowestMaxProb) {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const auto& t = bench::Original(seed);
    ForgetTask task = t.cfg.Tasks(10, seed).front();
    UnlearnedModel u = bench::Forget(seed, UnlearnMethod::kRetrain, task);
    IpvSet set = BuildIpvSetWhitebox(u.model, t.cfg.whitebox);
    const double forgotten = set[static_cast<std::size_t>(task.classes[0])].max_prob;
    for (const auto& ipv : set) {
      if (!task.Contains(static_cast<int>(ipv.target))) EXPECT_LT(forgotten, ipv.max_prob) << "seed " << seed;
    }
  }
}

TEST(Whitebox, SingleInitIsDeterministic) {
  const auto& t = bench::Original(1);
  InversionConfigWB cfg = t.cfg.whitebox;
  cfg.inits = 1;
  WhiteboxTrace a;
  WhiteboxTrace b;
  InvertedPredictionVector x = InvertWhitebox(t.model, 4, cfg, &a);
  InvertedPredictionVector y = InvertWhitebox(t.model, 4, cfg, &b);
  EXPECT_EQ(x.probs, y.probs);
  EXPECT_EQ(a.best_input, b.best_input);
  EXPECT_LT(a.final_loss[0], a.initial_loss[0]);
}

TEST(Whitebox, SelectsLowestFinalCrossEntropy) {
  const auto& t = bench::Original(2);
  WhiteboxTrace trace;
  InvertWhitebox(t.model, 0, t.cfg.whitebox, &trace);
  ASSERT_EQ(trace.final_ce.size(), t.cfg.whitebox.inits);
  for (std::size_t k = 0; k < trace.final_ce.size(); ++k) {
    if (!trace.diverged[k]) EXPECT_LE(trace.final_ce[trace.selected], trace.final_ce[k]);
  }
}

TEST(Whitebox, DivergenceIsReported) {
  const auto& t = bench::Original(1);
  InversionConfigWB cfg = t.cfg.whitebox;
  cfg.lr = 1e200;
  cfg.lambda_l2 = 1.0;
  EXPECT_THROW(InvertWhitebox(t.model, 0, cfg), DivergedError);
}

TEST(GaFitness, IsTargetProbabilityAndCountsQueries) {
  UniformOracle oracle(4, 5);
  std::vector<double> x = {0.1, 0.2, 0.3, 0.4};
  EXPECT_DOUBLE_EQ(GaFitness(oracle, x, 2), 0.2);
  EXPECT_EQ(oracle.queries(), 1u);
  GaFitness(oracle, x, 0);
  EXPECT_EQ(oracle.queries(), 2u);
  const auto& t = bench::Original(1);
  ModelOracle model(t.model, t.data.train.domain());
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> z(32);
    for (double& v : z) v = rng.Uniform();
    double f = GaFitness(model, z, static_cast<std::size_t>(i % 10));
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
}

TEST(GaCrossover, CutSemantics) {
  std::vector<double> a(4, 0.25);
  std::vector<double> b(4, 0.75);
  EXPECT_EQ(GaCrossover(a, b, 2), (std::vector<double>{0.25, 0.25, 0.75, 0.75}));
  EXPECT_EQ(GaCrossover(a, b, 4), a);
  std::vector<double> p = {0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<double> q = {0.9, 0.8, 0.7, 0.6, 0.5};
  for (std::size_t k = 1; k <= 5; ++k) {
    auto child = GaCrossover(p, q, k);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_TRUE(child[i] == p[i] || child[i] == q[i]);
  }
  EXPECT_THROW(GaCrossover(a, b, 0), InvalidArgument);
  EXPECT_THROW(GaCrossover(a, b, 5), InvalidArgument);
}

TEST(GaMutate, TouchesAtMostOneGeneAndStaysInBox) {
  Rng rng(21);
  for (int it = 0; it < 500; ++it) {
    std::vector<double> x(8);
    for (double& v : x) v = rng.Uniform();
    std::vector<double> y = x;
    GaMutate(y, 2.0, rng);
    int changed = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      changed += x[i] != y[i];
      EXPECT_GE(y[i], 0.0);
      EXPECT_LE(y[i], 1.0);
    }
    EXPECT_LE(changed, 1);
    std::vector<double> z = x;
    GaMutate(z, 0.0, rng);
    EXPECT_EQ(z, x);
    std::vector<double> w = x;
    GaMutatePerDimension(w, 3.0, rng);
    for (double v : w) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
  }
}

TEST(GaConfig, ScheduleAndValidation) {
  GAConfig cfg;
  for (std::size_t g = 0; g < 150; ++g) EXPECT_EQ(cfg.Sigma(g), cfg.sigma0 * std::pow(cfg.decay, g));
  EXPECT_EQ(cfg.ScheduledQueries(), 64u + 150u * 62u + 1u);
  GAConfig bad = cfg;
  bad.elites = 64;
  EXPECT_THROW(bad.Validate(), InvalidArgument);
  bad = cfg;
  bad.decay = 1.0;
  EXPECT_THROW(bad.Validate(), InvalidArgument);
  bad = cfg;
  bad.query_budget = 10;
  EXPECT_THROW(bad.Validate(), InvalidArgument);
}

TEST(Blackbox, ElitismKeepsBestFitnessMonotone) {
  const auto& t = bench::Original(1);
  ModelOracle oracle(t.model, t.data.train.domain());
  GaTrace trace;
  InvertedPredictionVector ipv = InvertBlackbox(oracle, 3, t.cfg.ga, &trace);
  ASSERT_EQ(trace.best_fitness.size(), t.cfg.ga.generations + 1);
  for (std::size_t g = 1; g < trace.best_fitness.size(); ++g) {
    EXPECT_GE(trace.best_fitness[g], trace.best_fitness[g - 1]);
  }
  EXPECT_EQ(ipv.fitness, trace.best_fitness.back());
  EXPECT_EQ(ipv.queries, t.cfg.ga.ScheduledQueries());
  EXPECT_FALSE(ipv.truncated);
}

TEST(Blackbox, EveryQueryStaysInUnitBox) {
  const auto& t = bench::Original(2);
  ModelOracle inner(t.model, t.data.train.domain());
  CheckingOracle oracle(inner);
  GAConfig cfg = t.cfg.ga;
  cfg.generations = 20;
  cfg.per_dimension_mutation = true;
  InvertBlackbox(oracle, 0, cfg);
  cfg.per_dimension_mutation = false;
  InvertBlackbox(oracle, 1, cfg);
  EXPECT_TRUE(oracle.all_in_box);
}

TEST(Blackbox, SmallBudgetTruncates) {
  const auto& t = bench::Original(1);
  ModelOracle oracle(t.model, t.data.train.domain());
  GAConfig cfg = t.cfg.ga;
  cfg.query_budget = 500;
  InvertedPredictionVector ipv = InvertBlackbox(oracle, 0, cfg);
  EXPECT_TRUE(ipv.truncated);
  EXPECT_LE(ipv.queries, 500u);
  EXPECT_EQ(oracle.queries(), ipv.queries);
}

TEST(Blackbox, RetainedClassesReachHighFitness) {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const auto& t = bench::Original(seed);
    ForgetTask task = t.cfg.Tasks(10, seed).front();
    UnlearnedModel u = bench::Forget(seed, UnlearnMethod::kRetrain, task);
    ModelOracle oracle(u.model, t.data.train.domain());
    IpvSet set = BuildIpvSetBlackbox(oracle, t.cfg.ga);
    double lowest_retained = 1.0;
    for (const auto& ipv : set) {
      if (!task.Contains(static_cast<int>(ipv.target))) {
        EXPECT_GE(ipv.fitness, 0.8) << "seed " << seed << " class " << ipv.target;
        lowest_retained = std::min(lowest_retained, ipv.fitness);
      }
    }
    const double forgotten = set[static_cast<std::size_t>(task.classes[0])].fitness;
    EXPECT_LT(forgotten, lowest_retained) << "seed " << seed;
    RecordProperty("fitness_gap_seed_" + std::to_string(seed), std::to_string(lowest_retained - forgotten));
  }
}

TEST(IpvSet, WhiteboxAndBlackboxAgreeOnArgmax) {
  const auto& t = bench::Original(1);
  IpvSet wb = BuildIpvSetWhitebox(t.model, t.cfg.whitebox);
  ModelOracle oracle(t.model, t.data.train.domain());
  IpvSet bb = BuildIpvSetBlackbox(oracle, t.cfg.ga);
  ASSERT_EQ(bb.size(), 10u);
  int agree = 0;
  for (std::size_t c = 0; c < 10; ++c) {
    EXPECT_EQ(bb[c].target, c);
    agree += Argmax(wb[c].probs) == Argmax(bb[c].probs);
  }
  EXPECT_GE(agree, 8);
}

TEST(IpvCsv, RoundTripsExactly) {
  IpvSet set;
  for (std::size_t t = 0; t < 3; ++t) {
    InvertedPredictionVector v;
    v.target = t;
    v.probs = {0.1 + 0.1 * t, 0.9 - 0.1 * t - 1e-17, 0.0};
    double s = v.probs[0] + v.probs[1];
    v.probs[2] = 1.0 - s;
    v.max_prob = *std::max_element(v.probs.begin(), v.probs.end());
    v.fitness = v.probs[t];
    v.queries = 100 + t;
    set.push_back(v);
  }
  std::string text = EncodeIpvCsv(set);
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,p0,p1,p2,max_prob,fitness,queries");
  IpvSet back = ParseIpvCsv(text);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].probs, set[i].probs);
    EXPECT_EQ(back[i].max_prob, set[i].max_prob);
    EXPECT_EQ(back[i].queries, set[i].queries);
  }
  EXPECT_EQ(EncodeIpvCsv(back), text);
}

TEST(IpvCsv, BadRowsReportLineNumbers) {
  std::string text = "t,p0,p1,max_prob,fitness,queries\n0,0.5,0.5,0.5,0.5,3\n1,0.5,abc,0.5,0.5,3\n";
  try {
    ParseIpvCsv(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(ParseIpvCsv("t,p0,p1,max_prob,fitness,queries\n0,0.7,0.7,0.7,0.7,1\n"), FormatError);
}

}  // namespace
}  // namespace ulk
