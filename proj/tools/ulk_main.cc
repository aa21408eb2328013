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

// Command-line front end: data generation, training, unlearning, attacks,
// screening, full experiment grids and report pivots.

#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ulk/attack/inversion.h"
#include "ulk/attack/param_attack.h"
#include "ulk/attack/screening.h"
#include "ulk/common/error.h"
#include "ulk/common/text.h"
#include "ulk/harness/config.h"
#include "ulk/harness/experiment.h"
#include "ulk/harness/report.h"
#include "ulk/nn/checkpoint.h"
#include "ulk/simd/kernels.h"
#include "ulk/unlearn/methods.h"
#include "ulk/unlearn/train.h"

namespace {

using ulk::ExperimentConfig;
using ulk::KeyValueConfig;

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;
  std::string data_kind;
  std::string data_dir;
  std::string seed;

  void Attach(CLI::App* app) {
    app->add_option("--config", path, "key=value experiment config file");
    app->add_option("--set", overrides, "override one config key (key=value), repeatable");
    app->add_option("--data", data_kind, "dataset kind")->check(CLI::IsMember({"blobs", "idx", "csv"}));
    app->add_option("--data-dir", data_dir, "directory holding the idx files or train.csv/test.csv");
    app->add_option("--seed", seed, "seed list, e.g. 1 or 1,2,3");
  }

  ExperimentConfig Resolve() const {
    KeyValueConfig kv = path.empty() ? KeyValueConfig{} : KeyValueConfig::Load(path);
    if (!data_kind.empty()) kv.Set("data.kind", data_kind);
    if (!data_dir.empty()) {
      std::filesystem::path d = data_dir;
      std::string kind = kv.GetString("data.kind", "blobs");
      if (kind == "idx") {
        kv.Set("data.train_images", (d / "train-images-idx3-ubyte").string());
        kv.Set("data.train_labels", (d / "train-labels-idx1-ubyte").string());
        kv.Set("data.test_images", (d / "t10k-images-idx3-ubyte").string());
        kv.Set("data.test_labels", (d / "t10k-labels-idx1-ubyte").string());
      } else if (kind == "csv") {
        kv.Set("data.train_csv", (d / "train.csv").string());
        kv.Set("data.test_csv", (d / "test.csv").string());
      } else {
        throw ulk::InvalidArgument("--data-dir needs --data idx or csv");
      }
    }
    if (!seed.empty()) kv.Set("seeds", seed);
    for (const std::string& o : overrides) {
      std::size_t eq = o.find('=');
      if (eq == std::string::npos) throw ulk::InvalidArgument("--set expects key=value, got '" + o + "'");
      kv.Set(std::string(ulk::Trim(o.substr(0, eq))), std::string(ulk::Trim(o.substr(eq + 1))));
    }
    return ExperimentConfig::From(kv);
  }
};

ulk::ForgetTask ParseForget(const std::string& text, std::size_t classes) {
  ulk::ForgetTask task = ulk::ForgetTask::Of(ulk::ParseIds(text, 0, ','));
  task.Validate(classes);
  return task;
}

void PrintSet(const char* label, const std::vector<int>& ids) {
  fmt::print("{}: {{{}}}\n", label, ulk::JoinIds(ids, ','));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ulk: class-unlearning label-leakage lab"};
  app.require_subcommand(1);
  std::string simd;
  app.add_option("--simd", simd, "kernel set: scalar|avx2|neon (default: best available)");

  // data gen
  CLI::App* data = app.add_subcommand("data", "dataset utilities");
  data->require_subcommand(1);
  CLI::App* gen = data->add_subcommand("gen", "write synthetic blob train/test CSVs");
  ulk::BlobConfig blobs;
  std::string gen_out = "data";
  gen->add_option("--classes", blobs.num_classes, "number of classes")->capture_default_str();
  gen->add_option("--n-per-class", blobs.n_per_class, "samples per class")->capture_default_str();
  gen->add_option("--dim", blobs.dim, "input dimension")->capture_default_str();
  gen->add_option("--separation", blobs.separation, "distance of class centers from the origin")
      ->capture_default_str();
  gen->add_option("--seed", blobs.seed, "generator seed")->capture_default_str();
  gen->add_option("--out", gen_out, "output directory")->capture_default_str();

  // train
  CLI::App* train = app.add_subcommand("train", "train the original model");
  ConfigArgs train_cfg;
  train_cfg.Attach(train);
  std::string train_out = "model.ulkm";
  std::string train_ledger;
  train->add_option("--out", train_out, "checkpoint path")->capture_default_str();
  train->add_option("--ledger", train_ledger, "also record the update ledger here (needed for AU)");

  // unlearn
  CLI::App* unlearn = app.add_subcommand("unlearn", "unlearn classes from a trained model");
  ConfigArgs unlearn_cfg;
  unlearn_cfg.Attach(unlearn);
  std::string method;
  std::string forget;
  std::string unlearn_in;
  std::string unlearn_out = "model_u.ulkm";
  std::string unlearn_ledger;
  unlearn->add_option("--method", method, "rt|ft|rl|au|ng")->required();
  unlearn->add_option("--forget", forget, "comma-separated class ids")->required();
  unlearn->add_option("--in", unlearn_in, "original checkpoint")->required();
  unlearn->add_option("--out", unlearn_out, "unlearned checkpoint")->capture_default_str();
  unlearn->add_option("--ledger", unlearn_ledger, "update ledger (au only)");

  // attack
  CLI::App* attack = app.add_subcommand("attack", "run one attack against a model");
  attack->require_subcommand(1);
  ConfigArgs attack_cfg;
  std::string attack_model;
  std::string attack_forget;
  std::string attack_out;
  std::string screen_kind = "youden";
  std::size_t depth = 4;
  CLI::App* pdot = attack->add_subcommand("param-dot", "dot-product parameter attack");
  CLI::App* pdiff = attack->add_subcommand("param-diff", "difference-vector decision-tree attack");
  CLI::App* iwb = attack->add_subcommand("invert-wb", "white-box inversion, writes the IPV CSV");
  CLI::App* ibb = attack->add_subcommand("invert-bb", "black-box GA inversion, writes the IPV CSV");
  for (CLI::App* sub : {pdot, pdiff, iwb, ibb}) {
    attack_cfg.Attach(sub);
    sub->add_option("--model", attack_model, "target checkpoint")->required();
  }
  for (CLI::App* sub : {pdot, pdiff}) {
    sub->add_option("--forget", attack_forget, "true forget set, labels the rows the screener is fit on")
        ->required();
    sub->add_option("--out", attack_out, "feature CSV path");
  }
  pdot->add_option("--screen", screen_kind, "youden|kmeans")
      ->check(CLI::IsMember({"youden", "kmeans"}))
      ->capture_default_str();
  pdiff->add_option("--depth", depth, "maximum tree depth")->capture_default_str();
  for (CLI::App* sub : {iwb, ibb}) sub->add_option("--out", attack_out, "IPV CSV path")->required();

  // screen
  CLI::App* screen = app.add_subcommand("screen", "screen an IPV set for forgotten classes");
  std::string criterion = "threshold";
  double alpha = 1.0;
  std::string ipv_path;
  std::string value = "max_prob";
  std::string identity = "target";
  std::string screen_out;
  screen->add_option("--criterion", criterion, "threshold|entropy")
      ->check(CLI::IsMember({"threshold", "entropy"}))
      ->capture_default_str();
  screen->add_option("--alpha", alpha, "threshold criterion alpha")->capture_default_str();
  screen->add_option("--ipv", ipv_path, "IPV CSV")->required();
  screen->add_option("--value", value, "max_prob|target_prob")
      ->check(CLI::IsMember({"max_prob", "target_prob"}))
      ->capture_default_str();
  screen->add_option("--identity", identity, "target|argmax")
      ->check(CLI::IsMember({"target", "argmax"}))
      ->capture_default_str();
  screen->add_option("--out", screen_out, "also write the JSON here");

  // run
  CLI::App* run = app.add_subcommand("run", "run the full experiment grid");
  ConfigArgs run_cfg;
  run_cfg.Attach(run);

  // report
  CLI::App* report = app.add_subcommand("report", "pivot one or more report CSVs");
  std::vector<std::string> report_in;
  report->add_option("reports", report_in, "report.csv files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!simd.empty()) {
      ulk::simd::SetActive(simd == "scalar" ? ulk::simd::Isa::kScalar
                           : simd == "avx2" ? ulk::simd::Isa::kAvx2
                           : simd == "neon" ? ulk::simd::Isa::kNeon
                                            : throw ulk::InvalidArgument("unknown --simd " + simd));
    }

    if (gen->parsed()) {
      std::filesystem::path dir(gen_out);
      ulk::SaveDatasetCsv(dir / "train.csv", ulk::GenBlobs(blobs, ulk::BlobStream::kTrain));
      ulk::SaveDatasetCsv(dir / "test.csv", ulk::GenBlobs(blobs, ulk::BlobStream::kTest));
      fmt::print("wrote {} and {}\n", (dir / "train.csv").string(), (dir / "test.csv").string());
      return 0;
    }

    if (train->parsed()) {
      ExperimentConfig cfg = train_cfg.Resolve();
      const std::uint64_t seed = cfg.seeds.front();
      ulk::ExperimentData d = ulk::LoadExperimentData(cfg, seed);
      ulk::ModelSpec spec = cfg.Spec(d.train.sample_shape(), d.train.num_classes());
      ulk::TrainConfig tc = cfg.unlearn.base;
      tc.seed = seed;
      ulk::TrainOptions opt;
      opt.record_ledger = !train_ledger.empty();
      ulk::TrainResult r = ulk::Train(ulk::Build(spec, seed), d.train, tc, opt);
      ulk::SaveCheckpoint(r.model, train_out);
      if (r.ledger) r.ledger->Save(train_ledger);
      fmt::print("model {} ({} params) train acc {:.4f} test acc {:.4f} -> {}\n", ulk::DescribeModel(spec),
                 r.model.NumParams(), ulk::Accuracy(r.model, d.train), ulk::Accuracy(r.model, d.test), train_out);
      return 0;
    }

    if (unlearn->parsed()) {
      ExperimentConfig cfg = unlearn_cfg.Resolve();
      const std::uint64_t seed = cfg.seeds.front();
      ulk::ExperimentData d = ulk::LoadExperimentData(cfg, seed);
      ulk::ModelArtifact original = ulk::LoadCheckpoint(unlearn_in);
      ulk::ForgetTask task = ParseForget(forget, original.spec().num_classes);
      ulk::UnlearnMethod m = ulk::ParseMethod(method);
      std::optional<ulk::UpdateLedger> ledger;
      if (!unlearn_ledger.empty()) ledger = ulk::UpdateLedger::Load(unlearn_ledger);
      ulk::UnlearnConfig uc = cfg.unlearn;
      uc.base.seed = seed;
      ulk::UnlearnedModel u = ulk::Unlearn(m, original, ledger ? &*ledger : nullptr, d.train, task, uc);
      ulk::SaveCheckpoint(u.model, unlearn_out);
      auto [rest, gone] = ulk::SplitForget(d.test, task);
      fmt::print("{}: forget acc {:.4f} -> {:.4f}, rest acc {:.4f} -> {:.4f} -> {}\n", ulk::MethodTag(m),
                 ulk::Accuracy(original, gone), ulk::Accuracy(u.model, gone), ulk::Accuracy(original, rest),
                 ulk::Accuracy(u.model, rest), unlearn_out);
      return 0;
    }

    if (attack->parsed()) {
      ExperimentConfig cfg = attack_cfg.Resolve();
      const std::uint64_t seed = cfg.seeds.front();
      ulk::ExperimentData d = ulk::LoadExperimentData(cfg, seed);
      ulk::ModelArtifact model = ulk::LoadCheckpoint(attack_model);
      if (pdot->parsed() || pdiff->parsed()) {
        ulk::ForgetTask task = ParseForget(attack_forget, model.spec().num_classes);
        ulk::ParamAttackConfig pc = cfg.param;
        pc.tree_depth = depth;
        ulk::ParamAttackInputs in = ulk::PrepareParamAttack(model, d.test, pc);
        std::vector<int> predicted;
        if (pdot->parsed()) {
          auto r = ulk::RunDotAttack(in, task, screen_kind == "youden" ? ulk::DotScreen::kYouden : ulk::DotScreen::kKMeans,
                                     pc);
          if (!attack_out.empty()) ulk::WriteDotFeatures(attack_out, r.features);
          if (r.youden) fmt::print("youden threshold {} J {}\n", r.youden->threshold, r.youden->j);
          if (r.kmeans) fmt::print("k-means boundary {}\n", r.kmeans->boundary);
          predicted = r.predicted;
        } else {
          auto r = ulk::RunDiffAttack(in, task, pc);
          if (!attack_out.empty()) ulk::WriteDiffFeatures(attack_out, r.features);
          fmt::print("tree depth {} nodes {}\n", r.tree->depth(), r.tree->nodes().size());
          predicted = r.predicted;
        }
        PrintSet("predicted", predicted);
        PrintSet("truth", task.classes);
        fmt::print("asr: {:.4f}\n", ulk::Asr(predicted, task.classes, model.spec().num_classes));
        return 0;
      }
      ulk::IpvSet ipvs;
      if (iwb->parsed()) {
        ipvs = ulk::BuildIpvSetWhitebox(model, cfg.whitebox);
      } else {
        ulk::ModelOracle oracle(model, d.train.domain());
        ipvs = ulk::BuildIpvSetBlackbox(oracle, cfg.ga);
      }
      ulk::WriteIpvCsv(attack_out, ipvs);
      for (const auto& ipv : ipvs) fmt::print("class {} max_prob {:.4f} fitness {:.4f}\n", ipv.target, ipv.max_prob, ipv.fitness);
      return 0;
    }

    if (screen->parsed()) {
      ulk::IpvSet ipvs = ulk::ReadIpvCsv(ipv_path);
      std::string json;
      if (criterion == "threshold") {
        json = ulk::ReportJson(ulk::ThresholdCriterion(
            ipvs, alpha, value == "max_prob" ? ulk::ThresholdValue::kMaxProb : ulk::ThresholdValue::kTargetProb));
      } else {
        json = ulk::ReportJson(ulk::EntropyCriterion(
            ipvs, identity == "target" ? ulk::ClassIdentity::kTarget : ulk::ClassIdentity::kArgmax));
      }
      if (!screen_out.empty()) {
        ulk::WriteFileBytes(screen_out, std::span(reinterpret_cast<const std::uint8_t*>(json.data()), json.size()));
      }
      std::fputs(json.c_str(), stdout);
      return 0;
    }

    if (run->parsed()) {
      ExperimentConfig cfg = run_cfg.Resolve();
      ulk::ExperimentOutcome out = ulk::RunExperiment(cfg);
      std::fputs(ulk::EncodePivotCsv(ulk::Pivot(out.reports)).c_str(), stdout);
      fmt::print("run directory: {}\n", out.run_dir.string());
      fmt::print("{} report rows, {} failed cells\n", out.reports.size(), out.failures.size());
      for (const auto& f : out.failures) {
        fmt::print(stderr, "failed: seed {} forget {} {} {}: {}\n", f.seed, f.forget, f.method, f.attack, f.error);
      }
      return out.failures.empty() ? 0 : 2;
    }

    if (report->parsed()) {
      std::vector<ulk::AttackReport> rows;
      for (const auto& path : report_in) {
        auto r = ulk::ReadReport(path);
        rows.insert(rows.end(), r.begin(), r.end());
      }
      std::fputs(ulk::EncodePivotCsv(ulk::Pivot(rows)).c_str(), stdout);
      return 0;
    }
  } catch (const ulk::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
