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

#include "ulk/nn/model.h"

#include <cmath>
#include <sstream>

#include "ulk/common/error.h"
#include "ulk/common/hash.h"
#include "ulk/common/rng.h"

namespace ulk {
namespace {

std::string JoinSizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<std::size_t> SplitSizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw FormatError("empty size in list '" + s + "'");
    out.push_back(static_cast<std::size_t>(std::stoull(item)));
  }
  return out;
}

LayerDesc Dense(std::size_t in, std::size_t out) {
  LayerDesc d;
  d.kind = LayerKind::kDense;
  d.in_shape = {in};
  d.out_shape = {out};
  d.param_shapes = {{out, in}, {out}};
  return d;
}

LayerDesc Elementwise(LayerKind kind, const Shape& shape) {
  LayerDesc d;
  d.kind = kind;
  d.in_shape = shape;
  d.out_shape = shape;
  return d;
}

}  // namespace

ModelSpec ModelSpec::Mlp(std::vector<std::size_t> dims) {
  ModelSpec s;
  s.kind = ModelKind::kMlp;
  s.input_shape = {dims.empty() ? 0 : dims.front()};
  s.num_classes = dims.empty() ? 0 : dims.back();
  s.dims = std::move(dims);
  return s;
}

ModelSpec ModelSpec::Cnn(Shape input_chw, std::vector<std::size_t> channels,
                         std::size_t num_classes, Padding padding) {
  ModelSpec s;
  s.kind = ModelKind::kCnn;
  s.input_shape = std::move(input_chw);
  s.dims = std::move(channels);
  s.num_classes = num_classes;
  s.padding = padding;
  return s;
}

void ModelSpec::Validate() const {
  if (num_classes < 2) throw InvalidArgument("model needs at least 2 classes");
  if (kind == ModelKind::kMlp) {
    if (dims.size() < 3) {
      throw InvalidArgument("mlp needs input, at least one hidden layer and an output width");
    }
    if (dims.back() != num_classes) throw InvalidArgument("mlp output width must equal T");
    if (input_shape != Shape{dims.front()}) throw InvalidArgument("mlp input shape mismatch");
    for (std::size_t d : dims) {
      if (d == 0) throw InvalidArgument("mlp layer width must be positive");
    }
  } else {
    if (input_shape.size() != 3) throw InvalidArgument("cnn input must be [C,H,W]");
    if (dims.empty()) throw InvalidArgument("cnn needs at least one conv layer");
    if (kernel == 0 || kernel % 2 == 0) throw InvalidArgument("cnn kernel must be odd");
    Layout(*this);  // throws if spatial dims collapse
  }
}

std::string ModelSpec::Describe() const {
  std::string s = kind == ModelKind::kMlp ? "kind=mlp" : "kind=cnn";
  s += " dims=" + JoinSizes(dims);
  s += " input=" + JoinSizes(input_shape);
  s += " classes=" + std::to_string(num_classes);
  if (kind == ModelKind::kCnn) {
    s += " kernel=" + std::to_string(kernel);
    s += padding == Padding::kSame ? " padding=same" : " padding=valid";
  }
  return s;
}

ModelSpec ParseModelSpec(const std::string& text) {
  ModelSpec s;
  std::stringstream in(text);
  std::string token;
  bool have_kind = false;
  while (in >> token) {
    auto eq = token.find('=');
    if (eq == std::string::npos) throw FormatError("bad spec token '" + token + "'");
    std::string key = token.substr(0, eq);
    std::string value = token.substr(eq + 1);
    if (key == "kind") {
      if (value == "mlp") {
        s.kind = ModelKind::kMlp;
      } else if (value == "cnn") {
        s.kind = ModelKind::kCnn;
      } else {
        throw FormatError("unknown model kind '" + value + "'");
      }
      have_kind = true;
    } else if (key == "dims") {
      s.dims = SplitSizes(value);
    } else if (key == "input") {
      s.input_shape = SplitSizes(value);
    } else if (key == "classes") {
      s.num_classes = std::stoull(value);
    } else if (key == "kernel") {
      s.kernel = std::stoull(value);
    } else if (key == "padding") {
      s.padding = value == "same" ? Padding::kSame : Padding::kValid;
    } else {
      throw FormatError("unknown spec key '" + key + "'");
    }
  }
  if (!have_kind) throw FormatError("spec is missing kind");
  s.Validate();
  return s;
}

std::string LayerDesc::Name(std::size_t index) const {
  std::string s = "layer " + std::to_string(index) + " (";
  switch (kind) {
    case LayerKind::kDense:
      s += "dense " + std::to_string(in_shape[0]) + "->" + std::to_string(out_shape[0]);
      break;
    case LayerKind::kConv2d: s += "conv2d " + ShapeString(in_shape) + "->" + ShapeString(out_shape); break;
    case LayerKind::kRelu: s += "relu"; break;
    case LayerKind::kMaxPool2: s += "maxpool2"; break;
    case LayerKind::kFlatten: s += "flatten"; break;
  }
  return s + ")";
}

std::vector<LayerDesc> Layout(const ModelSpec& spec) {
  std::vector<LayerDesc> layers;
  if (spec.kind == ModelKind::kMlp) {
    for (std::size_t i = 0; i + 1 < spec.dims.size(); ++i) {
      if (i > 0) layers.push_back(Elementwise(LayerKind::kRelu, {spec.dims[i]}));
      layers.push_back(Dense(spec.dims[i], spec.dims[i + 1]));
    }
    return layers;
  }
  Shape shape = spec.input_shape;
  for (std::size_t out_c : spec.dims) {
    std::size_t pad = spec.padding == Padding::kSame ? spec.kernel / 2 : 0;
    if (shape[1] + 2 * pad < spec.kernel || shape[2] + 2 * pad < spec.kernel) {
      throw InvalidArgument("cnn input too small for conv stack");
    }
    LayerDesc conv;
    conv.kind = LayerKind::kConv2d;
    conv.kernel = spec.kernel;
    conv.padding = spec.padding;
    conv.in_shape = shape;
    conv.out_shape = {out_c, shape[1] + 2 * pad - spec.kernel + 1,
                      shape[2] + 2 * pad - spec.kernel + 1};
    conv.param_shapes = {{out_c, shape[0], spec.kernel, spec.kernel}, {out_c}};
    layers.push_back(conv);
    shape = conv.out_shape;
    layers.push_back(Elementwise(LayerKind::kRelu, shape));
    if (shape[1] < 2 || shape[2] < 2) throw InvalidArgument("cnn feature map too small to pool");
    LayerDesc pool;
    pool.kind = LayerKind::kMaxPool2;
    pool.in_shape = shape;
    pool.out_shape = {shape[0], shape[1] / 2, shape[2] / 2};
    layers.push_back(pool);
    shape = pool.out_shape;
  }
  LayerDesc flat;
  flat.kind = LayerKind::kFlatten;
  flat.in_shape = shape;
  flat.out_shape = {NumElements(shape)};
  layers.push_back(flat);
  layers.push_back(Dense(NumElements(shape), spec.num_classes));
  return layers;
}

std::string Provenance::Describe() const {
  switch (kind) {
    case ProvenanceKind::kOriginal: return "original";
    case ProvenanceKind::kUnlearned: return "unlearned:" + method;
    case ProvenanceKind::kAuxiliary: return "auxiliary:" + std::to_string(class_id);
  }
  return "original";
}

Provenance Provenance::Parse(const std::string& text) {
  if (text == "original") return Original();
  if (text.rfind("unlearned:", 0) == 0) return Unlearned(text.substr(10));
  if (text.rfind("auxiliary:", 0) == 0) return Auxiliary(std::stoi(text.substr(10)));
  throw FormatError("unknown provenance '" + text + "'");
}

ModelArtifact::ModelArtifact(ModelSpec spec, ParamSet params, Provenance provenance,
                             bool features_frozen)
    : spec_(std::move(spec)),
      params_(std::move(params)),
      provenance_(std::move(provenance)),
      features_frozen_(features_frozen) {
  spec_.Validate();
  layers_ = Layout(spec_);
  if (params_.size() != layers_.size()) {
    throw ShapeError("model has " + std::to_string(layers_.size()) + " layers but " +
                     std::to_string(params_.size()) + " parameter groups");
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& want = layers_[i].param_shapes;
    if (params_[i].size() != want.size()) {
      throw ShapeError(layers_[i].Name(i) + ": wrong parameter tensor count");
    }
    for (std::size_t j = 0; j < want.size(); ++j) {
      if (params_[i][j].shape() != want[j]) {
        throw ShapeError(layers_[i].Name(i) + ": parameter " + std::to_string(j) + " has shape " +
                         ShapeString(params_[i][j].shape()) + ", expected " +
                         ShapeString(want[j]));
      }
    }
  }
}

std::vector<bool> ModelArtifact::TrainableMask() const {
  std::vector<bool> mask(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) mask[i] = IsTrainable(i);
  return mask;
}

ModelArtifact ModelArtifact::WithParams(ParamSet params) const {
  return ModelArtifact(spec_, std::move(params), provenance_, features_frozen_);
}

ModelArtifact ModelArtifact::WithProvenance(Provenance provenance) const {
  ModelArtifact copy = *this;
  copy.provenance_ = std::move(provenance);
  return copy;
}

std::size_t ModelArtifact::NumParams() const {
  std::size_t n = 0;
  for (const auto& layer : params_) {
    for (const auto& t : layer) n += t.size();
  }
  return n;
}

std::uint64_t ModelArtifact::ParamHash() const {
  Fnv1a h;
  h.Update(spec_.Describe());
  for (const auto& layer : params_) {
    for (const auto& t : layer) h.Update(t.values());
  }
  return h.digest();
}

ModelArtifact Build(const ModelSpec& spec, std::uint64_t seed) {
  spec.Validate();
  auto layers = Layout(spec);
  Rng root(seed);
  ParamSet params(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& shapes = layers[i].param_shapes;
    if (shapes.empty()) continue;
    Rng rng = root.Split(i);
    Tensor w(shapes[0]);
    std::size_t fan_in = w.size() / shapes[0][0];
    double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& v : w.values()) v = scale * rng.Normal();
    params[i].push_back(std::move(w));
    params[i].emplace_back(shapes[1], 0.0);
  }
  return ModelArtifact(spec, std::move(params), Provenance::Original());
}

ModelArtifact CloneFrozenHeadTemplate(const ModelArtifact& target, std::uint64_t seed,
                                      int class_id) {
  ModelArtifact fresh = Build(target.spec(), seed);
  ParamSet params = target.params();
  std::size_t head = target.feature_boundary();
  params[head] = fresh.params()[head];
  return ModelArtifact(target.spec(), std::move(params), Provenance::Auxiliary(class_id),
                       /*features_frozen=*/true);
}

std::size_t HeadParamCount(const ModelSpec& spec, bool include_bias) {
  auto layers = Layout(spec);
  const auto& shapes = layers.back().param_shapes;
  std::size_t n = NumElements(shapes[0]);
  if (include_bias) n += NumElements(shapes[1]);
  return n;
}

ParameterVector HeadVector(const ModelArtifact& model, bool include_bias) {
  const LayerParams& head = model.params()[model.feature_boundary()];
  ParameterVector pv;
  pv.values.assign(head[0].values().begin(), head[0].values().end());
  if (include_bias) pv.values.insert(pv.values.end(), head[1].values().begin(), head[1].values().end());
  pv.source = HexDigest(model.ParamHash());
  pv.head_only = true;
  pv.includes_bias = include_bias;
  return pv;
}

ModelArtifact WithHeadVector(const ModelArtifact& model, const ParameterVector& head) {
  std::size_t expected = HeadParamCount(model.spec(), head.includes_bias);
  if (head.values.size() != expected) {
    throw ShapeError("head vector has " + std::to_string(head.values.size()) +
                     " values, expected " + std::to_string(expected));
  }
  ParamSet params = model.params();
  LayerParams& layer = params[model.feature_boundary()];
  std::size_t nw = layer[0].size();
  std::copy(head.values.begin(), head.values.begin() + static_cast<std::ptrdiff_t>(nw),
            layer[0].values().begin());
  if (head.includes_bias) {
    std::copy(head.values.begin() + static_cast<std::ptrdiff_t>(nw), head.values.end(),
              layer[1].values().begin());
  }
  return model.WithParams(std::move(params));
}

}  // namespace ulk
