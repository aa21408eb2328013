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

#ifndef ULK_NN_MODEL_H_
#define ULK_NN_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ulk/nn/tensor.h"

namespace ulk {

enum class ModelKind { kMlp, kCnn };
enum class Padding { kValid, kSame };

// Architecture descriptor.
//   mlp: dims = [input, hidden..., T]; dense layers with ReLU between them.
//   cnn: dims = conv channel counts; each conv (k x k, stride 1) is followed
//        by ReLU and a 2x2 max-pool, then flatten and a dense head of width T.
struct ModelSpec {
  ModelKind kind = ModelKind::kMlp;
  std::vector<std::size_t> dims;
  Shape input_shape;
  std::size_t num_classes = 0;
  std::size_t kernel = 3;
  Padding padding = Padding::kValid;

  static ModelSpec Mlp(std::vector<std::size_t> dims);
  static ModelSpec Cnn(Shape input_chw, std::vector<std::size_t> channels,
                       std::size_t num_classes, Padding padding = Padding::kValid);

  // Throws InvalidArgument if T < 2, the head width != T, or the layout does
  // not leave a feature extractor in front of the head.
  void Validate() const;
  // Canonical one-line text form, e.g. "kind=mlp dims=32,64,10". Parsed back
  // by ParseModelSpec.
  std::string Describe() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

ModelSpec ParseModelSpec(const std::string& text);

enum class LayerKind { kDense, kConv2d, kRelu, kMaxPool2, kFlatten };

struct LayerDesc {
  LayerKind kind = LayerKind::kDense;
  Shape in_shape;
  Shape out_shape;
  std::size_t kernel = 0;
  Padding padding = Padding::kValid;
  // Weights then bias; empty for parameter-free layers.
  std::vector<Shape> param_shapes;

  std::string Name(std::size_t index) const;
};

std::vector<LayerDesc> Layout(const ModelSpec& spec);

using LayerParams = std::vector<Tensor>;
using ParamSet = std::vector<LayerParams>;

enum class ProvenanceKind { kOriginal, kUnlearned, kAuxiliary };

struct Provenance {
  ProvenanceKind kind = ProvenanceKind::kOriginal;
  std::string method;  // unlearning method tag, for kUnlearned
  int class_id = -1;   // subset class, for kAuxiliary

  static Provenance Original() { return {}; }
  static Provenance Unlearned(std::string method) {
    return {ProvenanceKind::kUnlearned, std::move(method), -1};
  }
  static Provenance Auxiliary(int class_id) {
    return {ProvenanceKind::kAuxiliary, "", class_id};
  }

  std::string Describe() const;
  static Provenance Parse(const std::string& text);
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// Architecture + parameters + provenance. Immutable: training and unlearning
// produce new artifacts via WithParams.
class ModelArtifact {
 public:
  ModelArtifact(ModelSpec spec, ParamSet params, Provenance provenance,
                bool features_frozen = false);

  const ModelSpec& spec() const { return spec_; }
  const std::vector<LayerDesc>& layers() const { return layers_; }
  const ParamSet& params() const { return params_; }
  const Provenance& provenance() const { return provenance_; }

  // Index of the classifier head (the final dense layer). Layers before it
  // form the feature extractor.
  std::size_t feature_boundary() const { return layers_.size() - 1; }
  bool features_frozen() const { return features_frozen_; }
  bool IsTrainable(std::size_t layer) const {
    return !features_frozen_ || layer >= feature_boundary();
  }
  std::vector<bool> TrainableMask() const;

  ModelArtifact WithParams(ParamSet params) const;
  ModelArtifact WithProvenance(Provenance provenance) const;

  std::size_t NumParams() const;
  std::uint64_t ParamHash() const;

 private:
  ModelSpec spec_;
  std::vector<LayerDesc> layers_;
  ParamSet params_;
  Provenance provenance_;
  bool features_frozen_ = false;
};

// Fresh model with fan-in scaled Gaussian weights (He) and zero biases.
ModelArtifact Build(const ModelSpec& spec, std::uint64_t seed);

// Copy of `target` whose feature layers are frozen and whose head is
// re-initialized from `seed`.
ModelArtifact CloneFrozenHeadTemplate(const ModelArtifact& target, std::uint64_t seed,
                                      int class_id = -1);

// Flattened head parameters: weights row-major, then biases (when included).
struct ParameterVector {
  std::vector<double> values;
  std::string source;
  bool head_only = true;
  bool includes_bias = true;
};

std::size_t HeadParamCount(const ModelSpec& spec, bool include_bias = true);
ParameterVector HeadVector(const ModelArtifact& model, bool include_bias = true);
// Inverse of HeadVector. When the vector excludes biases the model's current
// biases are kept.
ModelArtifact WithHeadVector(const ModelArtifact& model, const ParameterVector& head);

}  // namespace ulk

#endif  // ULK_NN_MODEL_H_
