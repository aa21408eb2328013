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

#ifndef ULK_HARNESS_CONFIG_H_
#define ULK_HARNESS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ulk/attack/inversion.h"
#include "ulk/attack/param_attack.h"
#include "ulk/attack/screening.h"
#include "ulk/data/dataset.h"
#include "ulk/nn/model.h"
#include "ulk/unlearn/methods.h"

namespace ulk {

// Flat "key=value" text. '#' starts a comment; blank lines are ignored;
// later assignments win.
class KeyValueConfig {
 public:
  static KeyValueConfig Parse(const std::string& text);
  static KeyValueConfig Load(const std::filesystem::path& path);

  void Set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool Has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string GetString(const std::string& key, const std::string& fallback) const;
  double GetDouble(const std::string& key, double fallback) const;
  std::int64_t GetInt(const std::string& key, std::int64_t fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;
  std::vector<std::string> GetList(const std::string& key, const std::vector<std::string>& fallback) const;

  // Sorted "key=value" lines.
  std::string Canonical() const;

 private:
  std::map<std::string, std::string> values_;
};

struct DataSettings {
  std::string kind = "blobs";  // blobs | idx | csv
  BlobConfig blobs;
  std::filesystem::path train_images, train_labels, test_images, test_labels;  // idx
  std::filesystem::path train_csv, test_csv;                                   // csv
  std::size_t max_per_class = 0;  // 0 keeps every sample
};

struct ModelSettings {
  ModelKind kind = ModelKind::kMlp;
  std::vector<std::size_t> hidden = {64};
  std::vector<std::size_t> channels = {8, 16};
  Padding padding = Padding::kSame;
};

struct ForgetSettings {
  enum class Mode { kList, kRandom, kSweep };
  Mode mode = Mode::kRandom;
  std::vector<int> classes;
  std::size_t count = 1;      // kRandom
  std::size_t sweep_max = 0;  // kSweep; 0 means T - 1
};

struct ExperimentConfig {
  DataSettings data;
  ModelSettings model;
  UnlearnConfig unlearn;
  ForgetSettings forget;
  std::vector<UnlearnMethod> methods;
  std::vector<std::string> attacks;        // param-dot, param-diff, invert-wb, invert-bb
  std::vector<std::string> param_screens;  // youden, kmeans
  ParamAttackConfig param;
  InversionConfigWB whitebox;
  GAConfig ga;
  std::vector<std::string> criteria;  // threshold, entropy
  double alpha = 1.0;
  ThresholdValue threshold_value = ThresholdValue::kMaxProb;
  ClassIdentity identity = ClassIdentity::kTarget;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out = "runs";
  std::size_t workers = 1;
  bool record_wall_time = false;
  bool save_artifacts = true;

  std::string canonical;  // canonical text of the settings that shape results
  std::string hash;       // 16 hex digits of `canonical`

  // Throws InvalidArgument on unknown keys or bad values. ULK_SEED, when set,
  // replaces `seeds`.
  static ExperimentConfig From(const KeyValueConfig& kv);
  static const std::set<std::string>& KnownKeys();

  ModelSpec Spec(const Shape& input_shape, std::size_t num_classes) const;
  std::vector<ForgetTask> Tasks(std::size_t num_classes, std::uint64_t seed) const;
};

std::vector<std::uint64_t> ParseSeedList(const std::string& text);

}  // namespace ulk

#endif  // ULK_HARNESS_CONFIG_H_
