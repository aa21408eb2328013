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

// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "support/oracles.h"
#include "ulk/attack/classifiers.h"
#include "ulk/attack/inversion.h"
#include "ulk/attack/screening.h"
#include "ulk/common/rng.h"
#include "ulk/common/text.h"
#include "ulk/harness/config.h"
#include "ulk/harness/experiment.h"
#include "ulk/harness/report.h"
#include "ulk/unlearn/methods.h"
#include "ulk/unlearn/train.h"

namespace {

namespace fs = std::filesystem;
using namespace ulk;

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_s;  // 0 for no runtime bound
  std::function<Verdict()> run;
};

fs::path g_out = "acceptance_runs";
std::size_t g_ga_generations = 0;
std::size_t g_ga_runs = 0;
std::vector<std::string> g_ga_failures;

const char* kSeeds = "1,2,3,4,5";

ExperimentConfig MakeConfig(const std::map<std::string, std::string>& overrides) {
  KeyValueConfig kv;
  kv.Set("data.kind", "blobs");
  kv.Set("seeds", kSeeds);
  kv.Set("forget", "random:1");
  kv.Set("workers", "1");
  kv.Set("out", g_out.string());
  kv.Set("artifacts.save", "false");
  for (const auto& [k, v] : overrides) kv.Set(k, v);
  return ExperimentConfig::From(kv);
}

ExperimentOutcome RunGrid(const std::map<std::string, std::string>& overrides) {
  ExperimentConfig cfg = MakeConfig(overrides);
  ExperimentOutcome out = RunExperiment(cfg);
  bool has_bb = std::find(cfg.attacks.begin(), cfg.attacks.end(), "invert-bb") != cfg.attacks.end();
  if (has_bb) {
    g_ga_generations += out.ga_generations_checked;
    ++g_ga_runs;
    for (const auto& f : out.failures) {
      if (f.attack == "invert-bb") g_ga_failures.push_back(f.error);
    }
  }
  return out;
}

struct Mean {
  double sum = 0;
  std::size_t n = 0;
  double value() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
};

Mean MeanAsr(const std::vector<AttackReport>& rows, const std::string& attack, const std::string& criterion,
             std::size_t n_forget = 0) {
  Mean m;
  for (const auto& r : rows) {
    if (r.attack != attack || r.criterion != criterion) continue;
    if (n_forget != 0 && r.n_forget != n_forget) continue;
    m.sum += r.asr;
    ++m.n;
  }
  return m;
}

std::string FailureNote(const ExperimentOutcome& out) {
  if (out.failures.empty()) return "";
  return fmt::format("; {} failed cells (first: {})", out.failures.size(), out.failures.front().error);
}

// 1 -------------------------------------------------------------------------
Verdict GradientCorrectness() {
  Rng rng(20260101);
  double worst = 0;
  std::size_t nets = 0;
  std::size_t checks = 0;
  for (int i = 0; i < 24; ++i) {
    const bool cnn = i % 2 == 1;
    ModelArtifact m = oracle::RandomSmallNet(rng, cnn);
    const Shape& in = m.spec().input_shape;
    Tensor x(in, oracle::RandomInput(rng, NumElements(in)));
    const std::size_t t = rng.Below(m.spec().num_classes);
    for (InversionObjective obj : {InversionObjective{t, 0.0, 0.0}, InversionObjective{t, 0.05, 0.0},
                                   InversionObjective{t, 0.05, 0.02}}) {
      worst = std::max(worst, oracle::InputGradientError(m, x, obj));
      ++checks;
    }
    std::vector<double> batch = oracle::RandomInput(rng, 3 * NumElements(in));
    std::vector<int> labels;
    for (int k = 0; k < 3; ++k) labels.push_back(static_cast<int>(rng.Below(m.spec().num_classes)));
    worst = std::max(worst, oracle::ParamGradientError(m, batch, labels));
    ++checks;
    ++nets;
  }
  return {worst < 1e-6, fmt::format("{} nets, {} checks, worst relative error {:.2e} (bound 1e-6)", nets,
                                    checks, worst)};
}

// 2 -------------------------------------------------------------------------
std::vector<double> RandomScores(Rng& rng, std::size_t n) {
  std::vector<double> s(n);
  const bool gridded = rng.Below(2) == 0;  // integer grid forces ties
  for (double& v : s) v = gridded ? static_cast<double>(rng.Below(6)) : rng.Normal();
  return s;
}

Verdict OracleEquivalence() {
  constexpr int kInstances = 500;
  Rng rng(424242);
  int youden_ok = 0;
  int kmeans_ok = 0;
  int stump_ok = 0;
  int rows_ok = 0;
  for (int it = 0; it < kInstances; ++it) {
    // Youden.
    {
      std::size_t n = 2 + rng.Below(63);
      std::vector<double> s = RandomScores(rng, n);
      std::vector<int> y(n);
      for (auto& v : y) v = static_cast<int>(rng.Below(2));
      y[0] = 0;
      y[1] = 1;
      YoudenResult got = YoudenThreshold(s, y);
      oracle::YoudenBest want = oracle::BruteYouden(s, y);
      bool ok = want.found ? (!got.degenerate || want.j_numerator <= 0) && got.threshold == want.threshold &&
                                 got.orientation == want.orientation && std::abs(got.j - want.j) < 1e-12
                           : got.degenerate;
      youden_ok += ok;
    }
    // 1-D k-means.
    {
      std::size_t n = 2 + rng.Below(63);
      std::vector<double> s = RandomScores(rng, n);
      s[0] = -1.5;
      s[1] = 7.5;
      KMeans1dResult got = KMeans1d(s);
      oracle::PartitionBest want = oracle::BruteKMeans1d(s);
      bool ok = std::abs(got.sse - want.sse) <= 1e-9 * (1.0 + want.sse);
      if (want.unique) ok = ok && got.cluster == want.cluster;
      if (n <= 14) {
        oracle::PartitionBest all = oracle::BruteKMeans1dSubsets(s);
        ok = ok && std::abs(all.sse - want.sse) <= 1e-9 * (1.0 + want.sse);
      }
      kmeans_ok += ok;
    }
    // Gini stump.
    {
      std::size_t n = 2 + rng.Below(63);
      std::size_t dims = 1 + rng.Below(5);
      std::vector<std::vector<double>> rows(n);
      for (auto& r : rows) r = RandomScores(rng, dims);
      std::vector<int> y(n);
      for (auto& v : y) v = static_cast<int>(rng.Below(2));
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      GiniSplit got = BestGiniSplit(rows, y, idx);
      oracle::StumpBest want = oracle::BruteStump(rows, y);
      bool ok = got.found == want.found;
      if (ok && want.found) {
        ok = got.feature == want.feature && got.threshold == want.threshold && got.improves == want.improves;
      }
      stump_ok += ok;
    }
    // Two-means on sorted probability rows.
    {
      std::size_t n = 2 + rng.Below(9);
      std::size_t dims = 2 + rng.Below(9);
      std::vector<std::vector<double>> rows(n);
      for (auto& r : rows) {
        r.resize(dims);
        double total = 0;
        double sharp = rng.Below(2) == 0 ? 1.0 : 6.0;
        for (double& v : r) total += (v = std::exp(sharp * rng.Normal()));
        for (double& v : r) v /= total;
        std::sort(r.begin(), r.end(), std::greater<>());
      }
      TwoMeans got = KMeansRows(rows);
      oracle::PartitionBest want = oracle::BruteTwoPartition(rows);
      bool ok = !got.degenerate && std::abs(got.sse - want.sse) <= 1e-9 * (1.0 + want.sse) &&
                std::abs(oracle::DirectSse(rows, got.cluster) - got.sse) <= 1e-9 * (1.0 + got.sse);
      if (want.unique) ok = ok && got.cluster == want.cluster;
      rows_ok += ok;
    }
  }
  bool pass = youden_ok == kInstances && kmeans_ok == kInstances && stump_ok == kInstances &&
              rows_ok == kInstances;
  return {pass, fmt::format("agreement youden {}/{}, kmeans-1d {}/{}, stump {}/{}, two-means rows {}/{}",
                            youden_ok, kInstances, kmeans_ok, kInstances, stump_ok, kInstances, rows_ok,
                            kInstances)};
}

// 3 -------------------------------------------------------------------------
Verdict UnlearningEfficacy() {
  ExperimentConfig cfg = MakeConfig({});
  std::size_t ok = 0;
  std::size_t total = 0;
  double worst_forget = 0;
  double worst_drop = -1;
  std::string worst_cell;
  for (std::uint64_t seed : cfg.seeds) {
    ExperimentData d = LoadExperimentData(cfg, seed);
    ForgetTask task = cfg.Tasks(d.train.num_classes(), seed).front();
    TrainConfig tc = cfg.unlearn.base;
    tc.seed = seed;
    TrainOptions opt;
    opt.record_ledger = true;
    TrainResult original = Train(Build(cfg.Spec(d.train.sample_shape(), d.train.num_classes()), seed),
                                 d.train, tc, opt);
    auto [rest_test, forget_test] = SplitForget(d.test, task);
    const double rest0 = Accuracy(original.model, rest_test);
    for (UnlearnMethod m : AllMethods()) {
      UnlearnConfig uc = cfg.unlearn;
      uc.base.seed = seed;
      UnlearnedModel u = Unlearn(m, original.model, &*original.ledger, d.train, task, uc);
      double forget_acc = Accuracy(u.model, forget_test);
      double drop = rest0 - Accuracy(u.model, rest_test);
      ++total;
      if (forget_acc < 0.2 && drop <= 0.05) ++ok;
      worst_forget = std::max(worst_forget, forget_acc);
      if (drop > worst_drop) {
        worst_drop = drop;
        worst_cell = fmt::format("{} seed {}", MethodTag(m), seed);
      }
    }
  }
  return {ok == total, fmt::format("{}/{} (method, seed) cells pass; worst forget acc {:.3f} (< 0.20), worst "
                                   "retained drop {:.3f} at {} (<= 0.05)",
                                   ok, total, worst_forget, worst_drop, worst_cell)};
}

// 4 -------------------------------------------------------------------------
Verdict AmnesiacExactness() {
  ExperimentConfig cfg = MakeConfig({});
  double worst = 0;
  std::size_t params = 0;
  for (std::uint64_t seed : {std::uint64_t{1}, std::uint64_t{2}}) {
    ExperimentData d = LoadExperimentData(cfg, seed);
    TrainConfig tc = cfg.unlearn.base;
    tc.seed = seed;
    TrainOptions opt;
    opt.record_ledger = true;
    TrainResult r = Train(Build(cfg.Spec(d.train.sample_shape(), d.train.num_classes()), seed), d.train, tc,
                          opt);
    std::vector<bool> all(r.ledger->entries().size(), true);
    ModelArtifact back = SubtractLedger(r.model, *r.ledger, all);
    const ParamSet& init = r.ledger->initial();
    for (std::size_t l = 0; l < init.size(); ++l) {
      for (std::size_t t = 0; t < init[l].size(); ++t) {
        for (std::size_t i = 0; i < init[l][t].size(); ++i) {
          worst = std::max(worst, std::abs(back.params()[l][t][i] - init[l][t][i]));
          ++params;
        }
      }
    }
  }
  return {worst <= 1e-9, fmt::format("{} parameters over 2 trainings, worst deviation {:.2e} (bound 1e-9)",
                                     params, worst)};
}

// 5 -------------------------------------------------------------------------
Verdict ParameterAttacks() {
  ExperimentOutcome out = RunGrid({{"attack", "param-dot,param-diff"}});
  Mean tree = MeanAsr(out.reports, "param-diff", "tree");
  Mean youden = MeanAsr(out.reports, "param-dot", "youden");
  Mean kmeans = MeanAsr(out.reports, "param-dot", "kmeans");
  bool pass = out.failures.empty() && tree.n == 25 && youden.n == 25 && kmeans.n == 25 &&
              tree.value() >= 85 && youden.value() >= 75 && kmeans.value() >= 75;
  return {pass, fmt::format("5 methods x 5 seeds: diff+tree {:.2f} (>= 85), dot+youden {:.2f} (>= 75), "
                            "dot+kmeans {:.2f} (>= 75){}",
                            tree.value(), youden.value(), kmeans.value(), FailureNote(out))};
}

// 6 -------------------------------------------------------------------------
Verdict WhiteboxInversion() {
  ExperimentOutcome single = RunGrid({{"attack", "invert-wb"}});
  ExperimentOutcome multi = RunGrid({{"attack", "invert-wb"}, {"forget", "random:3"}});
  Mean st = MeanAsr(single.reports, "invert-wb", "threshold");
  Mean se = MeanAsr(single.reports, "invert-wb", "entropy");
  Mean mt = MeanAsr(multi.reports, "invert-wb", "threshold");
  Mean me = MeanAsr(multi.reports, "invert-wb", "entropy");
  bool pass = single.failures.empty() && multi.failures.empty() && st.n == 25 && se.n == 25 && mt.n == 25 &&
              me.n == 25 && st.value() >= 90 && se.value() >= 90 && mt.value() >= 80 && me.value() >= 80;
  return {pass, fmt::format("single-class threshold {:.2f} / entropy {:.2f} (>= 90); three-class threshold "
                            "{:.2f} / entropy {:.2f} (>= 80){}{}",
                            st.value(), se.value(), mt.value(), me.value(), FailureNote(single),
                            FailureNote(multi))};
}

// 7 -------------------------------------------------------------------------
Verdict BlackboxInversion() {
  ExperimentOutcome out = RunGrid({{"attack", "invert-bb"}, {"artifacts.save", "true"}});
  ExperimentConfig cfg = MakeConfig({{"attack", "invert-bb"}});
  std::vector<double> asr;
  for (const auto& r : out.reports) {
    if (r.attack == "invert-bb" && r.criterion == "threshold") asr.push_back(r.asr);
  }
  Mean ent = MeanAsr(out.reports, "invert-bb", "entropy");
  double mean = asr.empty() ? 0.0 : std::accumulate(asr.begin(), asr.end(), 0.0) / asr.size();
  double lower = asr.empty() ? 0.0 : oracle::BootstrapMeanQuantile(asr, 10000, 0.025, 77);
  // Every IPV must have been produced inside the scheduled query budget.
  const std::size_t budget = cfg.ga.query_budget != 0 ? cfg.ga.query_budget : cfg.ga.ScheduledQueries();
  std::size_t ipvs = 0;
  std::size_t over = 0;
  for (const auto& e : fs::recursive_directory_iterator(out.run_dir)) {
    if (e.path().filename() != "ipv_bb.csv") continue;
    for (const auto& ipv : ReadIpvCsv(e.path())) {
      ++ipvs;
      if (ipv.queries > budget || ipv.truncated) ++over;
    }
  }
  bool pass = out.failures.empty() && asr.size() == 25 && mean >= 65 && lower > 50 && ipvs == 250 && over == 0;
  return {pass, fmt::format("threshold mean ASR {:.2f} (>= 65), bootstrap 95% lower bound {:.2f} (> 50); "
                            "entropy {:.2f}; {} IPVs, {} over the {}-query budget{}",
                            mean, lower, ent.value(), ipvs, over, budget, FailureNote(out))};
}

// 8 -------------------------------------------------------------------------
Verdict MaxProbSeparation() {
  ExperimentOutcome out = RunGrid({{"attack", "invert-wb"}, {"unlearn.method", "rt"}, {"artifacts.save", "true"}});
  std::size_t ok = 0;
  std::size_t seen = 0;
  double worst_gap = 1e9;
  for (const auto& r : out.reports) {
    if (r.criterion != "threshold") continue;
    fs::path ipv = out.run_dir / fmt::format("seed-{}", r.seed) /
                   fmt::format("forget-{}", JoinIds(r.truth, '_')) / "RT" / "ipv_wb.csv";
    IpvSet set = ReadIpvCsv(ipv);
    double forgotten = 0;
    double retained = 1.0;
    for (const auto& v : set) {
      if (std::binary_search(r.truth.begin(), r.truth.end(), static_cast<int>(v.target))) {
        forgotten += v.max_prob / static_cast<double>(r.truth.size());
      } else {
        retained = std::min(retained, v.max_prob);
      }
    }
    double gap = retained - forgotten;
    worst_gap = std::min(worst_gap, gap);
    ++seen;
    if (gap >= 0.2) ++ok;
  }
  return {ok == 5 && seen == 5 && out.failures.empty(),
          fmt::format("{}/{} seeds with forgotten max_prob >= 0.2 below the retained minimum; smallest gap "
                      "{:.3f}{}",
                      ok, seen, worst_gap, FailureNote(out))};
}

// 9 -------------------------------------------------------------------------
Verdict ForgettingScaleSweep() {
  ExperimentOutcome out =
      RunGrid({{"attack", "param-diff,invert-wb"}, {"forget", "sweep"}, {"forget.sweep_max", "7"}});
  bool pass = out.failures.empty();
  std::string curve;
  double min_tree = 1e9;
  for (std::size_t n = 1; n <= 7; ++n) {
    Mean t = MeanAsr(out.reports, "param-diff", "tree", n);
    pass = pass && t.n == 25;
    min_tree = std::min(min_tree, t.value());
    curve += fmt::format("{}{}:{:.0f}", n == 1 ? "" : " ", n, t.value());
  }
  // Threshold screening gates; entropy is reported alongside.
  double th1 = MeanAsr(out.reports, "invert-wb", "threshold", 1).value();
  double th7 = MeanAsr(out.reports, "invert-wb", "threshold", 7).value();
  double en1 = MeanAsr(out.reports, "invert-wb", "entropy", 1).value();
  double en7 = MeanAsr(out.reports, "invert-wb", "entropy", 7).value();
  pass = pass && th1 - th7 >= 10;
  std::string wb = fmt::format("; white-box threshold n=1 {:.2f} vs n=7 {:.2f} (drop >= 10); entropy n=1 {:.2f} vs "
                               "n=7 {:.2f}",
                               th1, th7, en1, en7);
  pass = pass && min_tree >= 80;
  return {pass, fmt::format("diff+tree ASR by n_forget [{}] (each >= 80){}{}", curve, wb, FailureNote(out))};
}

// 10 ------------------------------------------------------------------------
Verdict MetricHarness() {
  double mean = oracle::RandomGuessMeanAsr(200, 10, 5150);
  bool elitism = g_ga_runs > 0 && g_ga_generations > 0 && g_ga_failures.empty();
  return {std::abs(mean - 50.0) <= 5.0 && elitism,
          fmt::format("random-guess mean ASR {:.2f} over 200 trials (50 +- 5); elitism held in {} GA generations "
                      "across {} black-box grids{}",
                      mean, g_ga_generations, g_ga_runs,
                      g_ga_failures.empty() ? "" : "; violation: " + g_ga_failures.front())};
}

}  // namespace

int main(int argc, char** argv) {
  unsetenv("ULK_SEED");
  if (argc > 1) g_out = argv[1];
  std::vector<Criterion> criteria = {
      {1, "gradient correctness", 10, GradientCorrectness},
      {2, "oracle equivalence", 30, OracleEquivalence},
      {3, "unlearning efficacy", 180, UnlearningEfficacy},
      {4, "amnesiac exactness", 10, AmnesiacExactness},
      {5, "parameter attacks", 600, ParameterAttacks},
      {6, "white-box inversion", 600, WhiteboxInversion},
      {7, "black-box inversion", 1200, BlackboxInversion},
      {8, "max-prob separation", 0, MaxProbSeparation},
      {9, "forgetting-scale sweep", 0, ForgettingScaleSweep},
      {10, "metric harness", 0, MetricHarness},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, fmt::format("threw: {}", e.what())};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool in_time = c.limit_s == 0 || secs < c.limit_s;
    bool pass = v.pass && in_time;
    failed += !pass;
    std::string timing = c.limit_s == 0 ? fmt::format("{:.1f}s", secs)
                                        : fmt::format("{:.1f}s of {:.0f}s", secs, c.limit_s);
    fmt::print("{} criterion {:>2} {}: {} [{}]\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail, timing);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
