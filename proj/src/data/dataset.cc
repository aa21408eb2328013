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

#include "ulk/data/dataset.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ulk/common/error.h"
#include "ulk/common/text.h"
#include "ulk/common/rng.h"
#include "ulk/nn/checkpoint.h"

namespace ulk {

LabeledDataset::LabeledDataset(Shape sample_shape, std::size_t num_classes,
                               std::vector<double> values, std::vector<int> labels,
                               std::string split, InputDomain domain)
    : sample_shape_(std::move(sample_shape)),
      sample_size_(NumElements(sample_shape_)),
      num_classes_(num_classes),
      values_(std::move(values)),
      labels_(std::move(labels)),
      split_(std::move(split)),
      domain_(domain) {
  if (values_.size() != labels_.size() * sample_size_) {
    throw ShapeError("dataset holds " + std::to_string(values_.size()) + " values for " +
                     std::to_string(labels_.size()) + " samples of " +
                     std::to_string(sample_size_));
  }
  for (int y : labels_) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes_) {
      throw InvalidArgument("label " + std::to_string(y) + " outside [0," +
                            std::to_string(num_classes_) + ")");
    }
  }
}

Tensor LabeledDataset::SampleTensor(std::size_t i) const {
  auto s = sample(i);
  return Tensor(sample_shape_, std::vector<double>(s.begin(), s.end()));
}

LabeledDataset LabeledDataset::Subset(std::span<const std::size_t> indices,
                                      std::string split) const {
  std::vector<double> values;
  values.reserve(indices.size() * sample_size_);
  std::vector<int> labels;
  labels.reserve(indices.size());
  for (std::size_t i : indices) {
    auto s = sample(i);
    values.insert(values.end(), s.begin(), s.end());
    labels.push_back(labels_[i]);
  }
  return LabeledDataset(sample_shape_, num_classes_, std::move(values), std::move(labels),
                        std::move(split), domain_);
}

LabeledDataset LabeledDataset::WithLabels(std::vector<int> labels, std::string split) const {
  return LabeledDataset(sample_shape_, num_classes_, values_, std::move(labels), std::move(split),
                        domain_);
}

LabeledDataset LabeledDataset::Concat(const LabeledDataset& a, const LabeledDataset& b,
                                      std::string split) {
  if (a.sample_shape_ != b.sample_shape_ || a.num_classes_ != b.num_classes_) {
    throw ShapeError("cannot concatenate datasets of different shape or class count");
  }
  std::vector<double> values = a.values_;
  values.insert(values.end(), b.values_.begin(), b.values_.end());
  std::vector<int> labels = a.labels_;
  labels.insert(labels.end(), b.labels_.begin(), b.labels_.end());
  return LabeledDataset(a.sample_shape_, a.num_classes_, std::move(values), std::move(labels),
                        std::move(split), a.domain_);
}

std::vector<std::size_t> LabeledDataset::ClassCounts() const {
  std::vector<std::size_t> counts(num_classes_, 0);
  for (int y : labels_) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

std::vector<std::size_t> LabeledDataset::IndicesOfClass(int class_id) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == class_id) out.push_back(i);
  }
  return out;
}

void LabeledDataset::RequireAllClasses() const {
  auto counts = ClassCounts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) throw InvalidArgument("class " + std::to_string(c) + " has no samples");
  }
}

// ---- IDX ------------------------------------------------------------------

namespace {

std::uint32_t ReadBigEndianU32(std::span<const std::uint8_t> bytes, std::size_t offset,
                               const char* what) {
  if (bytes.size() < offset + 4) {
    throw PayloadError(std::string(what) + ": header truncated");
  }
  return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
         (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
         static_cast<std::uint32_t>(bytes[offset + 3]);
}

void AppendBigEndianU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

}  // namespace

LabeledDataset ParseIdx(std::span<const std::uint8_t> image_bytes,
                        std::span<const std::uint8_t> label_bytes, std::size_t num_classes) {
  std::uint32_t image_magic = ReadBigEndianU32(image_bytes, 0, "image file");
  if (image_magic != kIdxImageMagic) {
    throw BadMagicError("image file: bad IDX magic " + std::to_string(image_magic));
  }
  std::uint32_t label_magic = ReadBigEndianU32(label_bytes, 0, "label file");
  if (label_magic != kIdxLabelMagic) {
    throw BadMagicError("label file: bad IDX magic " + std::to_string(label_magic));
  }
  const std::size_t n_images = ReadBigEndianU32(image_bytes, 4, "image file");
  const std::size_t rows = ReadBigEndianU32(image_bytes, 8, "image file");
  const std::size_t cols = ReadBigEndianU32(image_bytes, 12, "image file");
  const std::size_t n_labels = ReadBigEndianU32(label_bytes, 4, "label file");
  const std::size_t pixels = rows * cols;
  if (image_bytes.size() - 16 != n_images * pixels) {
    throw PayloadError("image file: header declares " + std::to_string(n_images) + " images of " +
                       std::to_string(rows) + "x" + std::to_string(cols) + " but payload holds " +
                       std::to_string(image_bytes.size() - 16) + " bytes");
  }
  if (label_bytes.size() - 8 != n_labels) {
    throw PayloadError("label file: header declares " + std::to_string(n_labels) +
                       " labels but payload holds " + std::to_string(label_bytes.size() - 8));
  }
  if (n_images != n_labels) {
    throw CountMismatchError(std::to_string(n_images) + " images but " + std::to_string(n_labels) +
                             " labels");
  }
  std::vector<double> values(n_images * pixels);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = image_bytes[16 + i] / 255.0;
  std::vector<int> labels(n_labels);
  for (std::size_t i = 0; i < n_labels; ++i) {
    labels[i] = label_bytes[8 + i];
    if (static_cast<std::size_t>(labels[i]) >= num_classes) {
      throw PayloadError("label " + std::to_string(labels[i]) + " at index " + std::to_string(i) +
                         " exceeds class count");
    }
  }
  return LabeledDataset({1, rows, cols}, num_classes, std::move(values), std::move(labels), "all",
                        InputDomain{0.0, 1.0});
}

LabeledDataset LoadIdx(const std::filesystem::path& images, const std::filesystem::path& labels,
                       std::size_t num_classes) {
  auto ib = ReadFileBytes(images);
  auto lb = ReadFileBytes(labels);
  return ParseIdx(ib, lb, num_classes);
}

std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> EncodeIdx(
    std::span<const std::vector<std::uint8_t>> images, std::size_t rows, std::size_t cols,
    std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> ib;
  AppendBigEndianU32(ib, kIdxImageMagic);
  AppendBigEndianU32(ib, static_cast<std::uint32_t>(images.size()));
  AppendBigEndianU32(ib, static_cast<std::uint32_t>(rows));
  AppendBigEndianU32(ib, static_cast<std::uint32_t>(cols));
  for (const auto& img : images) {
    if (img.size() != rows * cols) throw ShapeError("image size disagrees with rows x cols");
    ib.insert(ib.end(), img.begin(), img.end());
  }
  std::vector<std::uint8_t> lb;
  AppendBigEndianU32(lb, kIdxLabelMagic);
  AppendBigEndianU32(lb, static_cast<std::uint32_t>(labels.size()));
  lb.insert(lb.end(), labels.begin(), labels.end());
  return {std::move(ib), std::move(lb)};
}

// ---- blobs ----------------------------------------------------------------

std::vector<std::vector<double>> BlobCenters(const BlobConfig& config) {
  if (config.num_classes < 2 || config.dim == 0) throw InvalidArgument("blobs need T >= 2 and dim >= 1");
  Rng rng = Rng(config.seed).Split(1);
  std::vector<std::vector<double>> dirs;
  for (std::size_t c = 0; c < config.num_classes; ++c) {
    std::vector<double> v(config.dim);
    for (;;) {
      for (double& x : v) x = rng.Normal();
      // Gram-Schmidt against earlier directions while they still span < dim.
      if (c < config.dim) {
        for (const auto& u : dirs) {
          double proj = 0.0;
          for (std::size_t i = 0; i < v.size(); ++i) proj += v[i] * u[i];
          for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * u[i];
        }
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 1e-6) {
        for (double& x : v) x /= norm;
        break;
      }
    }
    dirs.push_back(v);
  }
  for (auto& d : dirs) {
    for (double& x : d) x *= config.separation;
  }
  return dirs;
}

LabeledDataset GenBlobs(const BlobConfig& config, BlobStream stream) {
  auto centers = BlobCenters(config);
  Rng rng = Rng(config.seed).Split(stream == BlobStream::kTrain ? 2 : 3);
  std::vector<double> values;
  values.reserve(config.num_classes * config.n_per_class * config.dim);
  std::vector<int> labels;
  labels.reserve(config.num_classes * config.n_per_class);
  double max_abs = 0.0;
  for (const auto& c : centers) {
    for (double x : c) max_abs = std::max(max_abs, std::abs(x));
  }
  for (std::size_t c = 0; c < config.num_classes; ++c) {
    for (std::size_t s = 0; s < config.n_per_class; ++s) {
      for (std::size_t i = 0; i < config.dim; ++i) values.push_back(centers[c][i] + rng.Normal());
      labels.push_back(static_cast<int>(c));
    }
  }
  // Centers plus four standard deviations per coordinate.
  InputDomain domain{-(max_abs + 4.0), max_abs + 4.0};
  return LabeledDataset({config.dim}, config.num_classes, std::move(values), std::move(labels),
                        stream == BlobStream::kTrain ? "train" : "test", domain);
}

// ---- forgetting -----------------------------------------------------------

ForgetTask ForgetTask::Of(std::vector<int> classes, std::string dataset_id) {
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return ForgetTask{std::move(classes), std::move(dataset_id)};
}

void ForgetTask::Validate(std::size_t num_classes) const {
  if (classes.empty()) throw InvalidArgument("forget set is empty");
  for (int c : classes) {
    if (c < 0 || static_cast<std::size_t>(c) >= num_classes) {
      throw InvalidArgument("forget class " + std::to_string(c) + " outside [0," +
                            std::to_string(num_classes) + ")");
    }
  }
  if (classes.size() >= num_classes) {
    throw InvalidArgument("forget set must be a strict subset of the classes");
  }
}

bool ForgetTask::Contains(int class_id) const {
  return std::binary_search(classes.begin(), classes.end(), class_id);
}

std::pair<LabeledDataset, LabeledDataset> SplitForget(const LabeledDataset& dataset,
                                                      const ForgetTask& task) {
  task.Validate(dataset.num_classes());
  std::vector<std::size_t> rest;
  std::vector<std::size_t> unlearn;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (task.Contains(dataset.label(i)) ? unlearn : rest).push_back(i);
  }
  return {dataset.Subset(rest, "rest"), dataset.Subset(unlearn, "unlearn")};
}

std::vector<ClassSubset> PerClassSubsets(const LabeledDataset& dataset, std::size_t k,
                                         std::size_t m_models, std::uint64_t seed,
                                         const ForgetTask* forget) {
  if (k == 0) throw InvalidArgument("subset size must be positive");
  Rng root(seed);
  std::vector<ClassSubset> out;
  out.reserve(dataset.num_classes() * m_models);
  for (std::size_t c = 0; c < dataset.num_classes(); ++c) {
    auto pool = dataset.IndicesOfClass(static_cast<int>(c));
    if (pool.size() < k) {
      throw InvalidArgument("class " + std::to_string(c) + " has " + std::to_string(pool.size()) +
                            " samples, fewer than subset size " + std::to_string(k));
    }
    for (std::size_t m = 0; m < m_models; ++m) {
      Rng rng = root.Split(c * 1000003ULL + m);
      std::vector<std::size_t> idx = pool;
      // Partial Fisher-Yates: the first k slots are a uniform k-subset.
      for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.Below(idx.size() - i));
        std::swap(idx[i], idx[j]);
      }
      idx.resize(k);
      ClassSubset subset;
      subset.class_id = static_cast<int>(c);
      subset.model_index = m;
      subset.indices = std::move(idx);
      subset.role = (forget != nullptr && forget->Contains(static_cast<int>(c)))
                        ? SubsetRole::kUnlearnCandidate
                        : SubsetRole::kRestCandidate;
      out.push_back(std::move(subset));
    }
  }
  return out;
}

}  // namespace ulk

namespace ulk {

std::string EncodeDatasetCsv(const LabeledDataset& data) {
  std::string shape;
  for (std::size_t i = 0; i < data.sample_shape().size(); ++i) {
    shape += (i > 0 ? "x" : "") + std::to_string(data.sample_shape()[i]);
  }
  std::string out = fmt::format("# ulk-dataset shape={} classes={} domain={},{} split={}\nlabel", shape,
                                data.num_classes(), data.domain().lo, data.domain().hi, data.split());
  for (std::size_t j = 0; j < data.sample_size(); ++j) out += fmt::format(",x{}", j);
  out += '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += fmt::format("{},{}\n", data.label(i), fmt::join(data.sample(i), ","));
  }
  return out;
}

LabeledDataset ParseDatasetCsv(const std::string& text) {
  std::vector<std::string> lines = SplitLines(text);
  if (lines.size() < 2 || lines[0].rfind("# ulk-dataset ", 0) != 0) {
    throw ParseError(1, "missing '# ulk-dataset' preamble");
  }
  Shape shape;
  std::size_t classes = 0;
  InputDomain domain;
  std::string split = "all";
  for (const std::string& kv : Split(lines[0].substr(14), ' ')) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos) throw ParseError(1, "bad preamble field '" + kv + "'");
    std::string key = kv.substr(0, eq);
    std::string value = kv.substr(eq + 1);
    if (key == "shape") {
      for (const auto& d : Split(value, 'x')) shape.push_back(ParseUintField(d, 1));
    } else if (key == "classes") {
      classes = ParseUintField(value, 1);
    } else if (key == "domain") {
      auto parts = Split(value, ',');
      if (parts.size() != 2) throw ParseError(1, "domain needs lo,hi");
      domain = {ParseDoubleField(parts[0], 1), ParseDoubleField(parts[1], 1)};
    } else if (key == "split") {
      split = value;
    } else {
      throw ParseError(1, "unknown preamble field '" + key + "'");
    }
  }
  const std::size_t width = NumElements(shape);
  std::vector<double> values;
  std::vector<int> labels;
  for (std::size_t li = 2; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    auto cells = Split(lines[li], ',');
    if (cells.size() != width + 1) {
      throw ParseError(li + 1, fmt::format("expected {} columns, found {}", width + 1, cells.size()));
    }
    labels.push_back(static_cast<int>(ParseIntField(cells[0], li + 1)));
    for (std::size_t j = 0; j < width; ++j) values.push_back(ParseDoubleField(cells[1 + j], li + 1));
  }
  return LabeledDataset(shape, classes, std::move(values), std::move(labels), split, domain);
}

void SaveDatasetCsv(const std::filesystem::path& path, const LabeledDataset& data) {
  std::string text = EncodeDatasetCsv(data);
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

LabeledDataset LoadDatasetCsv(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = ReadFileBytes(path);
  return ParseDatasetCsv(std::string(bytes.begin(), bytes.end()));
}

}  // namespace ulk
