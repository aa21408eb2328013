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

#include "ulk/harness/config.h"

#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>

#include "ulk/common/error.h"
#include "ulk/common/hash.h"
#include "ulk/common/rng.h"
#include "ulk/common/text.h"
#include "ulk/nn/checkpoint.h"

namespace ulk {

KeyValueConfig KeyValueConfig::Parse(const std::string& text) {
  KeyValueConfig kv;
  std::vector<std::string> lines = SplitLines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(i + 1, "expected key=value");
    std::string key(Trim(line.substr(0, eq)));
    if (key.empty()) throw ParseError(i + 1, "empty key");
    kv.values_[key] = std::string(Trim(line.substr(eq + 1)));
  }
  return kv;
}

KeyValueConfig KeyValueConfig::Load(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = ReadFileBytes(path);
  return Parse(std::string(bytes.begin(), bytes.end()));
}

std::string KeyValueConfig::GetString(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::GetDouble(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return ParseDoubleField(it->second, 0);
  } catch (const ParseError&) {
    throw InvalidArgument(fmt::format("{}: '{}' is not a number", key, it->second));
  }
}

std::int64_t KeyValueConfig::GetInt(const std::string& key, std::int64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return ParseIntField(it->second, 0);
  } catch (const ParseError&) {
    throw InvalidArgument(fmt::format("{}: '{}' is not an integer", key, it->second));
  }
}

bool KeyValueConfig::GetBool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidArgument(fmt::format("{}: '{}' is not a boolean", key, v));
}

std::vector<std::string> KeyValueConfig::GetList(const std::string& key,
                                                 const std::vector<std::string>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::string> out;
  for (const auto& f : Split(it->second, ',')) {
    auto t = Trim(f);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::string KeyValueConfig::Canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::vector<std::uint64_t> ParseSeedList(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& f : Split(text, ',')) {
    auto t = Trim(f);
    if (t.empty()) continue;
    try {
      seeds.push_back(ParseUintField(t, 0));
    } catch (const ParseError&) {
      throw InvalidArgument(fmt::format("seed '{}' is not a non-negative integer", t));
    }
  }
  if (seeds.empty()) throw InvalidArgument("at least one seed is required");
  return seeds;
}

const std::set<std::string>& ExperimentConfig::KnownKeys() {
  static const std::set<std::string> keys = {
      "data.kind", "data.classes", "data.n_per_class", "data.dim", "data.separation",
      "data.train_images", "data.train_labels", "data.test_images", "data.test_labels",
      "data.train_csv", "data.test_csv", "data.max_per_class",
      "model.kind", "model.hidden", "model.channels", "model.padding",
      "train.epochs", "train.lr", "train.batch_size", "train.optimizer", "train.momentum",
      "train.batching",
      "unlearn.method", "unlearn.ft_epochs", "unlearn.ft_lr_multiplier", "unlearn.rl_epochs",
      "unlearn.rl_lr_multiplier", "unlearn.ng_max_epochs", "unlearn.ng_lr_multiplier",
      "unlearn.ng_stop_accuracy", "unlearn.ng_full_batch",
      "forget", "forget.sweep_max",
      "attack", "attack.param.screen", "attack.param.depth", "attack.param.cosine",
      "attack.param.fit_fraction",
      "aux.k", "aux.m", "aux.epochs", "aux.lr", "aux.include_bias",
      "inversion.k", "inversion.e", "inversion.lr", "inversion.l2", "inversion.tv",
      "ga.n", "ga.g", "ga.sigma0", "ga.decay", "ga.k_elite", "ga.budget", "ga.per_dim",
      "screen.criterion", "screen.alpha", "screen.value", "screen.identity",
      "seeds", "out", "workers", "report.record_wall_time", "artifacts.save"};
  return keys;
}

namespace {

// Keys that do not change any result row.
bool AffectsResults(const std::string& key) {
  return key != "out" && key != "workers" && key != "artifacts.save";
}

// Reads keys with defaults and records every resolved value, so the canonical
// form does not depend on which defaults were spelled out.
class Resolver {
 public:
  explicit Resolver(const KeyValueConfig& kv) : kv_(kv) {}

  std::string Str(const std::string& key, const std::string& fallback) {
    return Note(key, kv_.GetString(key, fallback));
  }
  double Num(const std::string& key, double fallback) {
    double v = kv_.GetDouble(key, fallback);
    Note(key, fmt::format("{}", v));
    return v;
  }
  std::size_t Count(const std::string& key, std::size_t fallback) {
    std::int64_t v = kv_.GetInt(key, static_cast<std::int64_t>(fallback));
    if (v < 0) throw InvalidArgument(fmt::format("{} must be >= 0", key));
    Note(key, std::to_string(v));
    return static_cast<std::size_t>(v);
  }
  bool Flag(const std::string& key, bool fallback) {
    bool v = kv_.GetBool(key, fallback);
    Note(key, v ? "true" : "false");
    return v;
  }
  std::vector<std::string> List(const std::string& key, const std::vector<std::string>& fallback) {
    auto v = kv_.GetList(key, fallback);
    std::string joined;
    for (std::size_t i = 0; i < v.size(); ++i) joined += (i ? "," : "") + v[i];
    Note(key, joined);
    return v;
  }
  std::vector<std::size_t> Sizes(const std::string& key, const std::vector<std::size_t>& fallback) {
    std::vector<std::string> def;
    for (auto s : fallback) def.push_back(std::to_string(s));
    std::vector<std::size_t> out;
    for (const auto& s : List(key, def)) {
      try {
        out.push_back(ParseUintField(s, 0));
      } catch (const ParseError&) {
        throw InvalidArgument(fmt::format("{}: '{}' is not a size", key, s));
      }
    }
    return out;
  }

  void Record(const std::string& key, const std::string& value) { Note(key, value); }

  std::string Canonical() const {
    std::string out;
    for (const auto& [k, v] : resolved_) {
      if (AffectsResults(k)) out += k + "=" + v + "\n";
    }
    return out;
  }

 private:
  std::string Note(const std::string& key, std::string value) {
    resolved_[key] = value;
    return value;
  }

  const KeyValueConfig& kv_;
  std::map<std::string, std::string> resolved_;
};

template <typename T>
T OneOf(const std::string& key, const std::string& value, std::initializer_list<std::pair<const char*, T>> options) {
  std::string names;
  for (const auto& [name, v] : options) {
    if (value == name) return v;
    names += (names.empty() ? "" : "|") + std::string(name);
  }
  throw InvalidArgument(fmt::format("{}: '{}' is not one of {}", key, value, names));
}

void CheckSubset(const std::string& key, const std::vector<std::string>& values,
                 std::initializer_list<const char*> allowed) {
  for (const auto& v : values) {
    bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return v == a; });
    if (!ok) throw InvalidArgument(fmt::format("{}: unknown entry '{}'", key, v));
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::From(const KeyValueConfig& kv) {
  for (const auto& [k, v] : kv.values()) {
    if (!KnownKeys().count(k)) throw InvalidArgument(fmt::format("unknown config key '{}'", k));
  }
  Resolver r(kv);
  ExperimentConfig c;

  c.data.kind = r.Str("data.kind", "blobs");
  OneOf<int>("data.kind", c.data.kind, {{"blobs", 0}, {"idx", 1}, {"csv", 2}});
  c.data.blobs.num_classes = r.Count("data.classes", 10);
  c.data.max_per_class = r.Count("data.max_per_class", 0);
  if (c.data.kind == "blobs") {
    c.data.blobs.n_per_class = r.Count("data.n_per_class", 200);
    c.data.blobs.dim = r.Count("data.dim", 32);
    c.data.blobs.separation = r.Num("data.separation", 3.0);
  } else if (c.data.kind == "idx") {
    c.data.train_images = r.Str("data.train_images", "");
    c.data.train_labels = r.Str("data.train_labels", "");
    c.data.test_images = r.Str("data.test_images", "");
    c.data.test_labels = r.Str("data.test_labels", "");
    if (c.data.train_images.empty() || c.data.train_labels.empty() || c.data.test_images.empty() ||
        c.data.test_labels.empty()) {
      throw InvalidArgument("data.kind=idx needs data.train_images/train_labels/test_images/test_labels");
    }
  } else {
    c.data.train_csv = r.Str("data.train_csv", "");
    c.data.test_csv = r.Str("data.test_csv", "");
    if (c.data.train_csv.empty() || c.data.test_csv.empty()) {
      throw InvalidArgument("data.kind=csv needs data.train_csv and data.test_csv");
    }
  }

  c.model.kind = OneOf<ModelKind>("model.kind", r.Str("model.kind", "mlp"),
                                  {{"mlp", ModelKind::kMlp}, {"cnn", ModelKind::kCnn}});
  if (c.model.kind == ModelKind::kMlp) {
    c.model.hidden = r.Sizes("model.hidden", {64});
  } else {
    c.model.channels = r.Sizes("model.channels", {8, 16});
    c.model.padding = OneOf<Padding>("model.padding", r.Str("model.padding", "same"),
                                     {{"same", Padding::kSame}, {"valid", Padding::kValid}});
  }

  TrainConfig& t = c.unlearn.base;
  t.epochs = static_cast<int>(r.Count("train.epochs", 20));
  t.lr = r.Num("train.lr", 0.05);
  t.batch_size = r.Count("train.batch_size", 32);
  t.optimizer = OneOf<Optimizer>("train.optimizer", r.Str("train.optimizer", "sgd"),
                                 {{"sgd", Optimizer::kSgd}, {"sgd-momentum", Optimizer::kSgdMomentum}});
  t.momentum = r.Num("train.momentum", 0.9);
  t.batching = OneOf<Batching>("train.batching", r.Str("train.batching", "class-grouped"),
                               {{"class-grouped", Batching::kClassGrouped}, {"shuffled", Batching::kShuffled}});
  t.Validate();

  for (const auto& m : r.List("unlearn.method", {"rt", "ft", "rl", "au", "ng"})) c.methods.push_back(ParseMethod(m));
  if (c.methods.empty()) throw InvalidArgument("unlearn.method lists no method");
  c.unlearn.ft_epochs = static_cast<int>(r.Count("unlearn.ft_epochs", static_cast<std::size_t>(c.unlearn.ft_epochs)));
  c.unlearn.ft_lr_multiplier = r.Num("unlearn.ft_lr_multiplier", c.unlearn.ft_lr_multiplier);
  c.unlearn.rl_epochs = static_cast<int>(r.Count("unlearn.rl_epochs", static_cast<std::size_t>(c.unlearn.rl_epochs)));
  c.unlearn.rl_lr_multiplier = r.Num("unlearn.rl_lr_multiplier", c.unlearn.rl_lr_multiplier);
  c.unlearn.ng_max_epochs =
      static_cast<int>(r.Count("unlearn.ng_max_epochs", static_cast<std::size_t>(c.unlearn.ng_max_epochs)));
  c.unlearn.ng_lr_multiplier = r.Num("unlearn.ng_lr_multiplier", c.unlearn.ng_lr_multiplier);
  c.unlearn.ng_stop_accuracy = r.Num("unlearn.ng_stop_accuracy", c.unlearn.ng_stop_accuracy);
  c.unlearn.ng_full_batch = r.Flag("unlearn.ng_full_batch", c.unlearn.ng_full_batch);

  std::string forget = r.Str("forget", "random:1");
  if (forget == "sweep") {
    c.forget.mode = ForgetSettings::Mode::kSweep;
    c.forget.sweep_max = r.Count("forget.sweep_max", 0);
  } else if (forget.rfind("random:", 0) == 0) {
    c.forget.mode = ForgetSettings::Mode::kRandom;
    try {
      c.forget.count = ParseUintField(forget.substr(7), 0);
    } catch (const ParseError&) {
      throw InvalidArgument(fmt::format("forget: bad random count in '{}'", forget));
    }
  } else {
    c.forget.mode = ForgetSettings::Mode::kList;
    try {
      c.forget.classes = ParseIds(forget, 0, ',');
    } catch (const ParseError&) {
      throw InvalidArgument(fmt::format("forget: '{}' is not a class list, random:N or sweep", forget));
    }
  }

  c.attacks = r.List("attack", {"param-dot", "param-diff", "invert-wb", "invert-bb"});
  CheckSubset("attack", c.attacks, {"param-dot", "param-diff", "invert-wb", "invert-bb"});
  c.param_screens = r.List("attack.param.screen", {"youden", "kmeans"});
  CheckSubset("attack.param.screen", c.param_screens, {"youden", "kmeans"});
  c.param.tree_depth = r.Count("attack.param.depth", 4);
  c.param.cosine = r.Flag("attack.param.cosine", false);
  c.param.fit_fraction = r.Num("attack.param.fit_fraction", 0.5);
  c.param.aux.subset_size = r.Count("aux.k", c.data.kind == "blobs" ? 20 : 100);
  c.param.aux.models_per_class = r.Count("aux.m", 50);
  c.param.aux.train.epochs = static_cast<int>(r.Count("aux.epochs", 60));
  c.param.aux.train.lr = r.Num("aux.lr", 0.1);
  c.param.aux.train.batch_size = c.param.aux.subset_size;
  c.param.aux.include_bias = r.Flag("aux.include_bias", true);

  c.whitebox.inits = r.Count("inversion.k", c.whitebox.inits);
  c.whitebox.iterations = r.Count("inversion.e", c.whitebox.iterations);
  c.whitebox.lr = r.Num("inversion.lr", c.whitebox.lr);
  c.whitebox.lambda_l2 = r.Num("inversion.l2", c.whitebox.lambda_l2);
  c.whitebox.lambda_tv = r.Num("inversion.tv", c.data.kind == "blobs" ? 0.0 : 1e-4);
  c.whitebox.Validate();

  c.ga.population = r.Count("ga.n", c.ga.population);
  c.ga.generations = r.Count("ga.g", c.ga.generations);
  c.ga.sigma0 = r.Num("ga.sigma0", c.ga.sigma0);
  c.ga.decay = r.Num("ga.decay", c.ga.decay);
  c.ga.elites = r.Count("ga.k_elite", c.ga.elites);
  c.ga.query_budget = r.Count("ga.budget", c.ga.query_budget);
  c.ga.per_dimension_mutation = r.Flag("ga.per_dim", false);
  c.ga.Validate();

  c.criteria = r.List("screen.criterion", {"threshold", "entropy"});
  CheckSubset("screen.criterion", c.criteria, {"threshold", "entropy"});
  c.alpha = r.Num("screen.alpha", 1.0);
  c.threshold_value = OneOf<ThresholdValue>(
      "screen.value", r.Str("screen.value", "max_prob"),
      {{"max_prob", ThresholdValue::kMaxProb}, {"target_prob", ThresholdValue::kTargetProb}});
  c.identity = OneOf<ClassIdentity>("screen.identity", r.Str("screen.identity", "target"),
                                    {{"target", ClassIdentity::kTarget}, {"argmax", ClassIdentity::kArgmax}});

  std::string seeds = kv.GetString("seeds", "1");
  if (const char* env = std::getenv("ULK_SEED"); env != nullptr && *env != '\0') seeds = env;
  c.seeds = ParseSeedList(seeds);
  r.Record("seeds", seeds);
  c.out = r.Str("out", "runs");
  c.workers = std::max<std::size_t>(1, r.Count("workers", 1));
  c.record_wall_time = r.Flag("report.record_wall_time", false);
  c.save_artifacts = r.Flag("artifacts.save", true);

  c.canonical = r.Canonical();
  Fnv1a h;
  h.Update(c.canonical);
  c.hash = HexDigest(h.digest());
  return c;
}

ModelSpec ExperimentConfig::Spec(const Shape& input_shape, std::size_t num_classes) const {
  if (model.kind == ModelKind::kMlp) {
    std::vector<std::size_t> dims = {NumElements(input_shape)};
    dims.insert(dims.end(), model.hidden.begin(), model.hidden.end());
    dims.push_back(num_classes);
    return ModelSpec::Mlp(dims);
  }
  Shape chw = input_shape;
  if (chw.size() == 2) chw.insert(chw.begin(), 1);
  return ModelSpec::Cnn(chw, model.channels, num_classes, model.padding);
}

std::vector<ForgetTask> ExperimentConfig::Tasks(std::size_t num_classes, std::uint64_t seed) const {
  std::vector<ForgetTask> tasks;
  auto random_classes = [&](std::size_t n, std::uint64_t tag) {
    std::vector<int> all(num_classes);
    for (std::size_t i = 0; i < num_classes; ++i) all[i] = static_cast<int>(i);
    Rng rng = Rng(seed).Split(tag);
    rng.Shuffle(std::span<int>(all));
    return std::vector<int>(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
  };
  switch (forget.mode) {
    case ForgetSettings::Mode::kList:
      tasks.push_back(ForgetTask::Of(forget.classes));
      break;
    case ForgetSettings::Mode::kRandom:
      if (forget.count == 0 || forget.count >= num_classes) {
        throw InvalidArgument(fmt::format("forget=random:{} needs 1 <= N < {}", forget.count, num_classes));
      }
      tasks.push_back(ForgetTask::Of(random_classes(forget.count, 0x666f)));
      break;
    case ForgetSettings::Mode::kSweep: {
      std::size_t top = forget.sweep_max == 0 ? num_classes - 1 : forget.sweep_max;
      if (top >= num_classes) throw InvalidArgument("forget.sweep_max must be < number of classes");
      // Nested sets: the first n classes of one seeded permutation.
      std::vector<int> order = random_classes(num_classes, 0x7377);
      for (std::size_t n = 1; n <= top; ++n) {
        tasks.push_back(ForgetTask::Of(std::vector<int>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n))));
      }
      break;
    }
  }
  for (auto& task : tasks) task.Validate(num_classes);
  return tasks;
}

}  // namespace ulk
