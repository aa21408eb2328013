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

#include "ulk/harness/experiment.h"

#include <fmt/format.h>

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "ulk/attack/inversion.h"
#include "ulk/attack/param_attack.h"
#include "ulk/attack/screening.h"
#include "ulk/common/error.h"
#include "ulk/common/rng.h"
#include "ulk/common/text.h"
#include "ulk/nn/checkpoint.h"
#include "ulk/unlearn/methods.h"
#include "ulk/unlearn/train.h"

namespace ulk {

namespace {

LabeledDataset CapPerClass(const LabeledDataset& data, std::size_t cap) {
  if (cap == 0) return data;
  std::vector<std::size_t> keep;
  std::vector<std::size_t> seen(data.num_classes(), 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto c = static_cast<std::size_t>(data.label(i));
    if (seen[c]++ < cap) keep.push_back(i);
  }
  return data.Subset(keep, data.split());
}

// Per-seed streams for the components that take their own seed.
std::uint64_t Derive(std::uint64_t seed, std::uint64_t tag) { return Rng(seed).Split(tag).NextU64(); }

void WriteText(const std::filesystem::path& path, const std::string& text) {
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string TaskLabel(const ForgetTask& task) { return JoinIds(task.classes, '_'); }

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// Runs jobs [0, n) on up to `workers` threads.
template <typename F>
void ParallelFor(std::size_t n, std::size_t workers, F&& job) {
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) job(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct SeedState {
  ExperimentData data;
  std::optional<TrainResult> original;
  std::vector<ForgetTask> tasks;
  std::string error;
};

struct UnitResult {
  std::vector<AttackReport> reports;
  std::vector<CellFailure> failures;
  std::optional<UnlearnMetrics> metrics;
  std::size_t ga_generations = 0;
};

}  // namespace

ExperimentData LoadExperimentData(const ExperimentConfig& cfg, std::uint64_t seed) {
  ExperimentData d;
  if (cfg.data.kind == "blobs") {
    BlobConfig b = cfg.data.blobs;
    b.seed = seed;
    d.train = GenBlobs(b, BlobStream::kTrain);
    d.test = GenBlobs(b, BlobStream::kTest);
    d.id = "blobs";
  } else if (cfg.data.kind == "idx") {
    const std::size_t t = cfg.data.blobs.num_classes;
    d.train = LoadIdx(cfg.data.train_images, cfg.data.train_labels, t);
    d.test = LoadIdx(cfg.data.test_images, cfg.data.test_labels, t);
    d.id = "idx:" + cfg.data.train_images.stem().string();
  } else {
    d.train = LoadDatasetCsv(cfg.data.train_csv);
    d.test = LoadDatasetCsv(cfg.data.test_csv);
    d.id = "csv:" + cfg.data.train_csv.stem().string();
  }
  d.train = CapPerClass(d.train, cfg.data.max_per_class);
  d.test = CapPerClass(d.test, cfg.data.max_per_class);
  d.train.RequireAllClasses();
  return d;
}

std::string DescribeModel(const ModelSpec& spec) {
  std::string dims;
  if (spec.kind == ModelKind::kMlp) {
    for (std::size_t i = 0; i < spec.dims.size(); ++i) dims += (i ? "-" : "") + std::to_string(spec.dims[i]);
    return "mlp-" + dims;
  }
  for (std::size_t i = 0; i < spec.dims.size(); ++i) dims += (i ? "-" : "") + std::to_string(spec.dims[i]);
  return fmt::format("cnn-{}-k{}-{}", dims, spec.kernel, spec.padding == Padding::kSame ? "same" : "valid");
}

ExperimentOutcome RunExperiment(const ExperimentConfig& cfg) {
  ExperimentOutcome outcome;
  outcome.run_dir = cfg.out / cfg.hash;
  if (cfg.save_artifacts) {
    std::filesystem::create_directories(outcome.run_dir);
    WriteText(outcome.run_dir / "config.cfg", cfg.canonical);
  }

  // Stage 1: data and the original model for every seed.
  std::vector<SeedState> seeds(cfg.seeds.size());
  ParallelFor(cfg.seeds.size(), cfg.workers, [&](std::size_t i) {
    SeedState& s = seeds[i];
    const std::uint64_t seed = cfg.seeds[i];
    try {
      s.data = LoadExperimentData(cfg, seed);
      s.tasks = cfg.Tasks(s.data.train.num_classes(), seed);
      ModelSpec spec = cfg.Spec(s.data.train.sample_shape(), s.data.train.num_classes());
      TrainConfig tc = cfg.unlearn.base;
      tc.seed = seed;
      TrainOptions opt;
      opt.record_ledger = std::find(cfg.methods.begin(), cfg.methods.end(), UnlearnMethod::kAmnesiac) !=
                          cfg.methods.end();
      s.original = Train(Build(spec, seed), s.data.train, tc, opt);
      if (cfg.save_artifacts) {
        SaveCheckpoint(s.original->model, outcome.run_dir / fmt::format("seed-{}", seed) / "original.ulkm");
      }
    } catch (const std::exception& e) {
      s.error = e.what();
    }
  });

  // Stage 2: one unit per (seed, task, method); attacks run inside the unit.
  struct Unit {
    std::size_t seed_index;
    std::size_t task_index;
    UnlearnMethod method;
  };
  std::vector<Unit> units;
  for (std::size_t si = 0; si < seeds.size(); ++si) {
    if (!seeds[si].error.empty()) {
      outcome.failures.push_back({cfg.seeds[si], "", "", "", "setup: " + seeds[si].error});
      continue;
    }
    for (std::size_t ti = 0; ti < seeds[si].tasks.size(); ++ti) {
      for (UnlearnMethod m : cfg.methods) units.push_back({si, ti, m});
    }
  }

  std::vector<UnitResult> results(units.size());
  ParallelFor(units.size(), cfg.workers, [&](std::size_t ui) {
    const Unit& unit = units[ui];
    const SeedState& s = seeds[unit.seed_index];
    const std::uint64_t seed = cfg.seeds[unit.seed_index];
    const ForgetTask& task = s.tasks[unit.task_index];
    const std::string tag(MethodTag(unit.method));
    const std::size_t classes = s.data.train.num_classes();
    UnitResult& out = results[ui];
    const std::filesystem::path dir =
        outcome.run_dir / fmt::format("seed-{}", seed) / ("forget-" + TaskLabel(task)) / tag;

    AttackReport base;
    base.dataset = s.data.id;
    base.model = DescribeModel(s.original->model.spec());
    base.unlearn_method = tag;
    base.truth = task.classes;
    base.seed = seed;
    base.config_hash = cfg.hash;

    auto fail = [&](const std::string& attack, const std::string& what) {
      out.failures.push_back({seed, TaskLabel(task), tag, attack, what});
    };

    std::optional<UnlearnedModel> unlearned;
    try {
      UnlearnConfig uc = cfg.unlearn;
      uc.base.seed = seed;
      const UpdateLedger* ledger = s.original->ledger ? &*s.original->ledger : nullptr;
      unlearned = Unlearn(unit.method, s.original->model, ledger, s.data.train, task, uc);
      auto [rest_test, forget_test] = SplitForget(s.data.test, task);
      out.metrics = UnlearnMetrics{seed,
                                   task.classes,
                                   tag,
                                   Accuracy(s.original->model, forget_test),
                                   Accuracy(s.original->model, rest_test),
                                   Accuracy(unlearned->model, forget_test),
                                   Accuracy(unlearned->model, rest_test)};
      if (cfg.save_artifacts) SaveCheckpoint(unlearned->model, dir / "model.ulkm");
    } catch (const std::exception& e) {
      fail("unlearn", e.what());
      return;
    }
    const ModelArtifact& model = unlearned->model;

    auto emit = [&](const std::string& attack, const std::string& criterion, std::vector<int> predicted,
                    double seconds) {
      AttackReport r = base;
      r.attack = attack;
      r.criterion = criterion;
      r.predicted = std::move(predicted);
      r.run_id = fmt::format("{}-s{}-f{}-{}-{}-{}", cfg.hash.substr(0, 8), seed, TaskLabel(task), tag, attack,
                             criterion);
      r.wall_time_s = cfg.record_wall_time ? seconds : 0.0;
      Score(r, classes);
      out.reports.push_back(std::move(r));
    };

    std::optional<ParamAttackInputs> param_inputs;
    double param_seconds = 0.0;
    auto prepare_param = [&] {
      if (param_inputs) return;
      auto t0 = std::chrono::steady_clock::now();
      ParamAttackConfig pc = cfg.param;
      pc.aux.seed = Derive(seed, 0x617578);
      param_inputs = PrepareParamAttack(model, s.data.test, pc);
      param_seconds = Seconds(t0);
    };

    auto screen_ipvs = [&](const std::string& attack, const IpvSet& ipvs, double seconds, const char* stem) {
      if (cfg.save_artifacts) WriteIpvCsv(dir / fmt::format("ipv_{}.csv", stem), ipvs);
      for (const std::string& criterion : cfg.criteria) {
        try {
          auto t0 = std::chrono::steady_clock::now();
          if (criterion == "threshold") {
            ThresholdReport rep = ThresholdCriterion(ipvs, cfg.alpha, cfg.threshold_value);
            if (cfg.save_artifacts) WriteText(dir / fmt::format("screen_{}_threshold.json", stem), ReportJson(rep));
            emit(attack, criterion, rep.predicted, seconds + Seconds(t0));
          } else {
            EntropyReport rep = EntropyCriterion(ipvs, cfg.identity);
            if (cfg.save_artifacts) WriteText(dir / fmt::format("screen_{}_entropy.json", stem), ReportJson(rep));
            emit(attack, criterion, rep.predicted, seconds + Seconds(t0));
          }
        } catch (const std::exception& e) {
          fail(attack + "/" + criterion, e.what());
        }
      }
    };

    for (const std::string& attack : cfg.attacks) {
      try {
        if (attack == "param-dot") {
          prepare_param();
          ParamAttackConfig pc = cfg.param;
          for (const std::string& screen : cfg.param_screens) {
            try {
              auto t0 = std::chrono::steady_clock::now();
              DotAttackResult r = RunDotAttack(*param_inputs, task,
                                               screen == "youden" ? DotScreen::kYouden : DotScreen::kKMeans, pc);
              if (cfg.save_artifacts) WriteDotFeatures(dir / "features_dot.csv", r.features);
              emit(attack, screen, r.predicted, param_seconds + Seconds(t0));
            } catch (const std::exception& e) {
              fail(attack + "/" + screen, e.what());
            }
          }
        } else if (attack == "param-diff") {
          prepare_param();
          auto t0 = std::chrono::steady_clock::now();
          DiffAttackResult r = RunDiffAttack(*param_inputs, task, cfg.param);
          if (cfg.save_artifacts) WriteDiffFeatures(dir / "features_diff.csv", r.features);
          emit(attack, "tree", r.predicted, param_seconds + Seconds(t0));
        } else if (attack == "invert-wb") {
          auto t0 = std::chrono::steady_clock::now();
          InversionConfigWB wc = cfg.whitebox;
          wc.seed = Derive(seed, 0x7762);
          IpvSet ipvs = BuildIpvSetWhitebox(model, wc);
          screen_ipvs(attack, ipvs, Seconds(t0), "wb");
        } else if (attack == "invert-bb") {
          auto t0 = std::chrono::steady_clock::now();
          GAConfig gc = cfg.ga;
          gc.seed = Derive(seed, 0x6262);
          ModelOracle oracle(model, s.data.train.domain());
          std::vector<GaTrace> traces;
          IpvSet ipvs = BuildIpvSetBlackbox(oracle, gc, &traces);
          std::string trace_csv = "class,generation,best_fitness\n";
          for (std::size_t c = 0; c < traces.size(); ++c) {
            const auto& best = traces[c].best_fitness;
            for (std::size_t g = 0; g < best.size(); ++g) {
              trace_csv += fmt::format("{},{},{}\n", c, g, best[g]);
              if (g > 0) {
                if (best[g] < best[g - 1]) throw Error("GA elitism violated");
                ++out.ga_generations;
              }
            }
          }
          if (cfg.save_artifacts) WriteText(dir / "ga_trace.csv", trace_csv);
          screen_ipvs(attack, ipvs, Seconds(t0), "bb");
        }
      } catch (const std::exception& e) {
        fail(attack, e.what());
      }
    }
  });

  for (UnitResult& r : results) {
    for (auto& row : r.reports) outcome.reports.push_back(std::move(row));
    for (auto& f : r.failures) outcome.failures.push_back(std::move(f));
    if (r.metrics) outcome.unlearning.push_back(*r.metrics);
    outcome.ga_generations_checked += r.ga_generations;
  }

  if (cfg.save_artifacts) {
    WriteReport(outcome.run_dir / "report.csv", outcome.reports);
    std::string u = "seed,forget,method,original_forget_acc,original_rest_acc,forget_acc,rest_acc\n";
    for (const auto& m : outcome.unlearning) {
      u += fmt::format("{},{},{},{},{},{},{}\n", m.seed, JoinIds(m.forget), m.method, m.original_forget_acc,
                       m.original_rest_acc, m.forget_acc, m.rest_acc);
    }
    WriteText(outcome.run_dir / "unlearning.csv", u);
    std::string f = "seed,forget,method,attack,error\n";
    for (const auto& x : outcome.failures) {
      std::string msg = x.error;
      for (char& ch : msg) {
        if (ch == ',' || ch == '\n') ch = ' ';
      }
      f += fmt::format("{},{},{},{},{}\n", x.seed, x.forget, x.method, x.attack, msg);
    }
    WriteText(outcome.run_dir / "failures.csv", f);
  }
  return outcome;
}

}  // namespace ulk
