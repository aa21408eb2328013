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

#ifndef ULK_DATA_DATASET_H_
#define ULK_DATA_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ulk/nn/tensor.h"

namespace ulk {

// Box that valid inputs live in. The black-box attacker searches the unit
// cube and queries are mapped affinely onto this box.
struct InputDomain {
  double lo = 0.0;
  double hi = 1.0;
  friend bool operator==(const InputDomain&, const InputDomain&) = default;
};

// Samples stored contiguously (n x sample_size) with integer class labels.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  LabeledDataset(Shape sample_shape, std::size_t num_classes, std::vector<double> values,
                 std::vector<int> labels, std::string split = "all", InputDomain domain = {});

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  std::size_t sample_size() const { return sample_size_; }
  const Shape& sample_shape() const { return sample_shape_; }
  std::size_t num_classes() const { return num_classes_; }
  const std::string& split() const { return split_; }
  const InputDomain& domain() const { return domain_; }

  std::span<const double> sample(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * sample_size_, sample_size_);
  }
  int label(std::size_t i) const { return labels_[i]; }
  std::span<const int> labels() const { return labels_; }
  std::span<const double> values() const { return values_; }
  Tensor SampleTensor(std::size_t i) const;

  LabeledDataset Subset(std::span<const std::size_t> indices, std::string split) const;
  LabeledDataset WithLabels(std::vector<int> labels, std::string split) const;
  static LabeledDataset Concat(const LabeledDataset& a, const LabeledDataset& b, std::string split);

  std::vector<std::size_t> ClassCounts() const;
  std::vector<std::size_t> IndicesOfClass(int class_id) const;
  // Throws InvalidArgument if some declared class has no sample.
  void RequireAllClasses() const;

 private:
  Shape sample_shape_;
  std::size_t sample_size_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<double> values_;
  std::vector<int> labels_;
  std::string split_;
  InputDomain domain_;
};

// ---- IDX ------------------------------------------------------------------

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// Big-endian IDX image (u8, n x rows x cols) and label (u8, n) files.
// Pixels are scaled by 1/255 into [0, 1]. Throws BadMagicError,
// PayloadError (header/payload disagreement) or CountMismatchError.
LabeledDataset ParseIdx(std::span<const std::uint8_t> image_bytes,
                        std::span<const std::uint8_t> label_bytes, std::size_t num_classes = 10);
LabeledDataset LoadIdx(const std::filesystem::path& images, const std::filesystem::path& labels,
                       std::size_t num_classes = 10);

// Inverse of ParseIdx for values already on the 1/255 grid; used by tests
// and `data gen`.
std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> EncodeIdx(
    std::span<const std::vector<std::uint8_t>> images, std::size_t rows, std::size_t cols,
    std::span<const std::uint8_t> labels);

// ---- dataset CSV ----------------------------------------------------------

// First line "# ulk-dataset shape=AxB classes=T domain=lo,hi split=name",
// then a "label,x0,..." header and one row per sample.
std::string EncodeDatasetCsv(const LabeledDataset& data);
LabeledDataset ParseDatasetCsv(const std::string& text);
void SaveDatasetCsv(const std::filesystem::path& path, const LabeledDataset& data);
LabeledDataset LoadDatasetCsv(const std::filesystem::path& path);

// ---- synthetic blobs ------------------------------------------------------

struct BlobConfig {
  std::size_t num_classes = 10;
  std::size_t n_per_class = 200;
  std::size_t dim = 32;
  double separation = 3.0;
  std::uint64_t seed = 1;
};

enum class BlobStream { kTrain, kTest };

// Class c ~ N(separation * u_c, I) with unit directions u_c (orthonormal when
// T <= dim). Train and test streams share the class centers.
LabeledDataset GenBlobs(const BlobConfig& config, BlobStream stream = BlobStream::kTrain);
std::vector<std::vector<double>> BlobCenters(const BlobConfig& config);

// ---- forgetting -----------------------------------------------------------

struct ForgetTask {
  std::vector<int> classes;  // sorted, unique
  std::string dataset_id;

  static ForgetTask Of(std::vector<int> classes, std::string dataset_id = "");
  // Throws InvalidArgument unless the set is non-empty, in range and a strict
  // subset of [0, num_classes).
  void Validate(std::size_t num_classes) const;
  bool Contains(int class_id) const;
};

// (D_rest, D_unlearn): a partition of `dataset` by label membership.
std::pair<LabeledDataset, LabeledDataset> SplitForget(const LabeledDataset& dataset,
                                                      const ForgetTask& task);

enum class SubsetRole { kRestCandidate, kUnlearnCandidate };

struct ClassSubset {
  int class_id = 0;
  std::size_t model_index = 0;
  std::vector<std::size_t> indices;  // into the source dataset
  SubsetRole role = SubsetRole::kRestCandidate;
};

// For every class, `m_models` independent label-pure subsets of `k` samples,
// each drawn without replacement. Ordered by class, then model index. Roles
// come from `forget` when given. Throws InvalidArgument if a class has fewer
// than k samples.
std::vector<ClassSubset> PerClassSubsets(const LabeledDataset& dataset, std::size_t k,
                                         std::size_t m_models, std::uint64_t seed,
                                         const ForgetTask* forget = nullptr);

}  // namespace ulk

#endif  // ULK_DATA_DATASET_H_
