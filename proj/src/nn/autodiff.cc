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

#include "ulk/nn/autodiff.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ulk/common/error.h"
#include "ulk/simd/kernels.h"

namespace ulk {
namespace {

std::size_t Pad(const LayerDesc& layer) {
  return layer.padding == Padding::kSame ? layer.kernel / 2 : 0;
}

// Gathers the C x k x k receptive field at output position (oy, ox).
void GatherPatch(const LayerDesc& layer, const double* in, std::size_t oy, std::size_t ox,
                 double* patch) {
  const std::size_t channels = layer.in_shape[0];
  const std::size_t h = layer.in_shape[1];
  const std::size_t w = layer.in_shape[2];
  const std::size_t k = layer.kernel;
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(Pad(layer));
  std::size_t p = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy + ky) - pad;
      for (std::size_t kx = 0; kx < k; ++kx, ++p) {
        std::ptrdiff_t x = static_cast<std::ptrdiff_t>(ox + kx) - pad;
        bool inside = y >= 0 && x >= 0 && y < static_cast<std::ptrdiff_t>(h) &&
                      x < static_cast<std::ptrdiff_t>(w);
        patch[p] = inside ? in[(c * h + static_cast<std::size_t>(y)) * w +
                               static_cast<std::size_t>(x)]
                          : 0.0;
      }
    }
  }
}

void ScatterPatch(const LayerDesc& layer, const double* patch, std::size_t oy, std::size_t ox,
                  double* in_grad) {
  const std::size_t channels = layer.in_shape[0];
  const std::size_t h = layer.in_shape[1];
  const std::size_t w = layer.in_shape[2];
  const std::size_t k = layer.kernel;
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(Pad(layer));
  std::size_t p = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy + ky) - pad;
      for (std::size_t kx = 0; kx < k; ++kx, ++p) {
        std::ptrdiff_t x = static_cast<std::ptrdiff_t>(ox + kx) - pad;
        if (y >= 0 && x >= 0 && y < static_cast<std::ptrdiff_t>(h) &&
            x < static_cast<std::ptrdiff_t>(w)) {
          in_grad[(c * h + static_cast<std::size_t>(y)) * w + static_cast<std::size_t>(x)] +=
              patch[p];
        }
      }
    }
  }
}

Tensor LayerForward(const LayerDesc& layer, const LayerParams& params, const Tensor& in,
                    std::vector<std::uint32_t>* argmax) {
  const auto& k = simd::Active();
  Tensor out(layer.out_shape);
  switch (layer.kind) {
    case LayerKind::kDense: {
      k.gemv(params[0].data(), in.data(), params[1].data(), out.data(), layer.out_shape[0],
             layer.in_shape[0]);
      break;
    }
    case LayerKind::kConv2d: {
      const std::size_t oc = layer.out_shape[0];
      const std::size_t oh = layer.out_shape[1];
      const std::size_t ow = layer.out_shape[2];
      const std::size_t psize = layer.in_shape[0] * layer.kernel * layer.kernel;
      std::vector<double> patch(psize);
      std::vector<double> column(oc);
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          GatherPatch(layer, in.data(), oy, ox, patch.data());
          k.gemv(params[0].data(), patch.data(), params[1].data(), column.data(), oc, psize);
          for (std::size_t c = 0; c < oc; ++c) out[(c * oh + oy) * ow + ox] = column[c];
        }
      }
      break;
    }
    case LayerKind::kRelu: {
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
      break;
    }
    case LayerKind::kMaxPool2: {
      const std::size_t c_n = layer.in_shape[0];
      const std::size_t h = layer.in_shape[1];
      const std::size_t w = layer.in_shape[2];
      const std::size_t oh = layer.out_shape[1];
      const std::size_t ow = layer.out_shape[2];
      if (argmax != nullptr) argmax->assign(out.size(), 0);
      for (std::size_t c = 0; c < c_n; ++c) {
        for (std::size_t y = 0; y < oh; ++y) {
          for (std::size_t x = 0; x < ow; ++x) {
            std::size_t best = (c * h + 2 * y) * w + 2 * x;
            for (std::size_t dy = 0; dy < 2; ++dy) {
              for (std::size_t dx = 0; dx < 2; ++dx) {
                std::size_t idx = (c * h + 2 * y + dy) * w + 2 * x + dx;
                if (in[idx] > in[best]) best = idx;
              }
            }
            std::size_t o = (c * oh + y) * ow + x;
            out[o] = in[best];
            if (argmax != nullptr) (*argmax)[o] = static_cast<std::uint32_t>(best);
          }
        }
      }
      break;
    }
    case LayerKind::kFlatten: {
      std::copy(in.values().begin(), in.values().end(), out.values().begin());
      break;
    }
  }
  return out;
}

// Returns d loss / d input of the layer; accumulates parameter grads into
// `param_grads` when non-null.
void LayerBackward(const LayerDesc& layer, const LayerParams& params, const Tensor& in,
                   const std::vector<std::uint32_t>& argmax, const Tensor& out_grad,
                   LayerParams* param_grads, Tensor* in_grad) {
  const auto& k = simd::Active();
  switch (layer.kind) {
    case LayerKind::kDense: {
      const std::size_t rows = layer.out_shape[0];
      const std::size_t cols = layer.in_shape[0];
      if (param_grads != nullptr) {
        k.outer_acc(out_grad.data(), in.data(), (*param_grads)[0].data(), rows, cols);
        k.axpy(1.0, out_grad.data(), (*param_grads)[1].data(), rows);
      }
      if (in_grad != nullptr) k.gemv_t_acc(params[0].data(), out_grad.data(), in_grad->data(), rows, cols);
      break;
    }
    case LayerKind::kConv2d: {
      const std::size_t oc = layer.out_shape[0];
      const std::size_t oh = layer.out_shape[1];
      const std::size_t ow = layer.out_shape[2];
      const std::size_t psize = layer.in_shape[0] * layer.kernel * layer.kernel;
      std::vector<double> patch(psize);
      std::vector<double> patch_grad(psize);
      std::vector<double> column(oc);
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          bool any = false;
          for (std::size_t c = 0; c < oc; ++c) {
            column[c] = out_grad[(c * oh + oy) * ow + ox];
            any = any || column[c] != 0.0;
          }
          if (!any) continue;
          if (param_grads != nullptr) {
            GatherPatch(layer, in.data(), oy, ox, patch.data());
            k.outer_acc(column.data(), patch.data(), (*param_grads)[0].data(), oc, psize);
            k.axpy(1.0, column.data(), (*param_grads)[1].data(), oc);
          }
          if (in_grad != nullptr) {
            std::fill(patch_grad.begin(), patch_grad.end(), 0.0);
            k.gemv_t_acc(params[0].data(), column.data(), patch_grad.data(), oc, psize);
            ScatterPatch(layer, patch_grad.data(), oy, ox, in_grad->data());
          }
        }
      }
      break;
    }
    case LayerKind::kRelu: {
      if (in_grad != nullptr) {
        for (std::size_t i = 0; i < in.size(); ++i) {
          if (in[i] > 0.0) (*in_grad)[i] += out_grad[i];
        }
      }
      break;
    }
    case LayerKind::kMaxPool2: {
      if (in_grad != nullptr) {
        for (std::size_t o = 0; o < out_grad.size(); ++o) (*in_grad)[argmax[o]] += out_grad[o];
      }
      break;
    }
    case LayerKind::kFlatten: {
      if (in_grad != nullptr) {
        for (std::size_t i = 0; i < out_grad.size(); ++i) (*in_grad)[i] += out_grad[i];
      }
      break;
    }
  }
}

}  // namespace

ParamSet ZerosLike(const ParamSet& params) {
  ParamSet out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (const auto& t : params[i]) out[i].emplace_back(t.shape(), 0.0);
  }
  return out;
}

Tensor ForwardRange(const ModelArtifact& model, std::size_t begin, std::size_t end,
                    std::span<const double> input, Tape* tape) {
  const auto& layers = model.layers();
  if (begin >= end || end > layers.size()) throw InvalidArgument("bad layer range");
  const LayerDesc& first = layers[begin];
  if (input.size() != NumElements(first.in_shape)) {
    throw ShapeError(first.Name(begin) + ": expected input of " +
                     std::to_string(NumElements(first.in_shape)) + " values " +
                     ShapeString(first.in_shape) + ", got " + std::to_string(input.size()));
  }
  Tensor x(first.in_shape, std::vector<double>(input.begin(), input.end()));
  if (tape != nullptr) {
    tape->first_layer = begin;
    tape->inputs.clear();
    tape->argmax.clear();
    tape->inputs.reserve(end - begin);
    tape->argmax.resize(end - begin);
  }
  for (std::size_t i = begin; i < end; ++i) {
    std::vector<std::uint32_t>* argmax = tape != nullptr ? &tape->argmax[i - begin] : nullptr;
    Tensor y = LayerForward(layers[i], model.params()[i], x, argmax);
    if (tape != nullptr) tape->inputs.push_back(std::move(x));
    x = std::move(y);
  }
  if (tape != nullptr) tape->output = x;
  return x;
}

Tensor Forward(const ModelArtifact& model, std::span<const double> input, Tape* tape) {
  return ForwardRange(model, 0, model.layers().size(), input, tape);
}

Tensor Forward(const ModelArtifact& model, const Tensor& input, Tape* tape) {
  const Shape& want = model.spec().input_shape;
  if (input.shape() != want) {
    throw ShapeError(model.layers()[0].Name(0) + ": input shape " + ShapeString(input.shape()) +
                     " does not match model input " + ShapeString(want));
  }
  return Forward(model, input.values(), tape);
}

GradientBundle Backward(const ModelArtifact& model, const Tape& tape,
                        std::span<const double> output_grad, bool want_input_grad) {
  const auto& layers = model.layers();
  const std::size_t begin = tape.first_layer;
  const std::size_t end = begin + tape.inputs.size();
  GradientBundle out;
  out.param_grads = ZerosLike(model.params());

  // Lowest layer that still needs a gradient flowing into it.
  std::size_t lowest_needed = end;
  for (std::size_t i = begin; i < end; ++i) {
    if (!layers[i].param_shapes.empty() && model.IsTrainable(i)) {
      lowest_needed = i;
      break;
    }
  }
  if (want_input_grad) lowest_needed = begin;

  Tensor grad(layers[end - 1].out_shape,
              std::vector<double>(output_grad.begin(), output_grad.end()));
  for (std::size_t i = end; i-- > begin;) {
    if (i < lowest_needed) break;
    const LayerDesc& layer = layers[i];
    LayerParams* pg = (!layer.param_shapes.empty() && model.IsTrainable(i))
                          ? &out.param_grads[i]
                          : nullptr;
    bool need_in = i > lowest_needed || (i == begin && want_input_grad);
    Tensor in_grad;
    if (need_in) in_grad = Tensor(layer.in_shape, 0.0);
    LayerBackward(layer, model.params()[i], tape.inputs[i - begin], tape.argmax[i - begin], grad,
                  pg, need_in ? &in_grad : nullptr);
    if (!need_in) break;
    grad = std::move(in_grad);
    if (i == begin && want_input_grad) out.input_grad = grad;
  }
  return out;
}

std::vector<double> Softmax(std::span<const double> logits) {
  double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

CrossEntropy SoftmaxCrossEntropy(std::span<const double> logits, std::size_t target) {
  if (target >= logits.size()) {
    throw InvalidArgument("class index " + std::to_string(target) + " out of range for " +
                          std::to_string(logits.size()) + " classes");
  }
  CrossEntropy ce;
  double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - m);
  double log_z = m + std::log(z);
  ce.loss = log_z - logits[target];
  ce.probs.resize(logits.size());
  ce.grad.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    ce.probs[i] = std::exp(logits[i] - log_z);
    ce.grad[i] = ce.probs[i] - (i == target ? 1.0 : 0.0);
  }
  return ce;
}

double L2Penalty(std::span<const double> x) {
  return simd::Dot(x, x);
}

namespace {

struct Grid {
  std::size_t channels, height, width;
};

Grid TvGrid(const Tensor& x) {
  const Shape& s = x.shape();
  if (s.size() == 3) return {s[0], s[1], s[2]};
  if (s.size() == 2) return {1, s[0], s[1]};
  return {1, 1, x.size()};
}

}  // namespace

double TvPenalty(const Tensor& x) {
  Grid g = TvGrid(x);
  double tv = 0.0;
  for (std::size_t c = 0; c < g.channels; ++c) {
    const double* p = x.data() + c * g.height * g.width;
    for (std::size_t y = 0; y < g.height; ++y) {
      for (std::size_t xx = 0; xx < g.width; ++xx) {
        double v = p[y * g.width + xx];
        if (xx + 1 < g.width) {
          double d = p[y * g.width + xx + 1] - v;
          tv += d * d;
        }
        if (y + 1 < g.height) {
          double d = p[(y + 1) * g.width + xx] - v;
          tv += d * d;
        }
      }
    }
  }
  return tv;
}

void AccumulateTvGrad(const Tensor& x, double scale, std::span<double> grad) {
  Grid g = TvGrid(x);
  for (std::size_t c = 0; c < g.channels; ++c) {
    std::size_t base = c * g.height * g.width;
    const double* p = x.data() + base;
    double* q = grad.data() + base;
    for (std::size_t y = 0; y < g.height; ++y) {
      for (std::size_t xx = 0; xx < g.width; ++xx) {
        std::size_t i = y * g.width + xx;
        if (xx + 1 < g.width) {
          double d = 2.0 * scale * (p[i + 1] - p[i]);
          q[i + 1] += d;
          q[i] -= d;
        }
        if (y + 1 < g.height) {
          double d = 2.0 * scale * (p[i + g.width] - p[i]);
          q[i + g.width] += d;
          q[i] -= d;
        }
      }
    }
  }
}

LossEval EvaluateInversionLoss(const ModelArtifact& model, const Tensor& x,
                               const InversionObjective& objective, bool with_grad) {
  if (objective.lambda_l2 < 0.0 || objective.lambda_tv < 0.0) {
    throw InvalidArgument("regularization weights must be non-negative");
  }
  if (objective.target >= model.spec().num_classes) {
    throw InvalidArgument("class index " + std::to_string(objective.target) +
                          " out of range for " + std::to_string(model.spec().num_classes) +
                          " classes");
  }
  Tape tape;
  Tensor logits = Forward(model, x, with_grad ? &tape : nullptr);
  CrossEntropy ce = SoftmaxCrossEntropy(logits.values(), objective.target);
  LossEval eval;
  eval.ce = ce.loss;
  eval.total = ce.loss;
  if (objective.lambda_l2 > 0.0) eval.total += objective.lambda_l2 * L2Penalty(x.values());
  if (objective.lambda_tv > 0.0) eval.total += objective.lambda_tv * TvPenalty(x);
  eval.logits = logits.vec();
  if (with_grad) {
    GradientBundle g = Backward(model, tape, ce.grad, /*want_input_grad=*/true);
    eval.grad = std::move(*g.input_grad);
    if (objective.lambda_l2 > 0.0) {
      simd::Axpy(2.0 * objective.lambda_l2, x.values(), eval.grad.values());
    }
    if (objective.lambda_tv > 0.0) AccumulateTvGrad(x, objective.lambda_tv, eval.grad.values());
  }
  return eval;
}

double LossTotal(const ModelArtifact& model, const Tensor& x, std::size_t target,
                 double lambda_l2, double lambda_tv) {
  return EvaluateInversionLoss(model, x, {target, lambda_l2, lambda_tv}, false).total;
}

Tensor GradInput(const ModelArtifact& model, const Tensor& x, std::size_t target,
                 double lambda_l2, double lambda_tv) {
  return EvaluateInversionLoss(model, x, {target, lambda_l2, lambda_tv}, true).grad;
}

namespace {

template <typename LossFn>
BatchGrad AccumulateBatch(const ModelArtifact& model, std::span<const double> inputs,
                          std::size_t sample_size, std::size_t n, std::size_t first_layer,
                          LossFn&& loss_fn) {
  BatchGrad out;
  out.grads.param_grads = ZerosLike(model.params());
  if (n == 0) return out;
  const std::size_t end = model.layers().size();
  Tape tape;
  // Fixed sample order keeps the reduction deterministic.
  for (std::size_t s = 0; s < n; ++s) {
    auto x = inputs.subspan(s * sample_size, sample_size);
    Tensor logits = ForwardRange(model, first_layer, end, x, &tape);
    std::vector<double> dlogits;
    out.mean_loss += loss_fn(s, logits.values(), dlogits, out.correct);
    GradientBundle g = Backward(model, tape, dlogits, false);
    for (std::size_t l = first_layer; l < end; ++l) {
      for (std::size_t j = 0; j < g.param_grads[l].size(); ++j) {
        simd::Axpy(1.0, g.param_grads[l][j].values(), out.grads.param_grads[l][j].values());
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  out.mean_loss *= inv;
  for (auto& layer : out.grads.param_grads) {
    for (auto& t : layer) {
      for (double& v : t.values()) v *= inv;
    }
  }
  return out;
}

}  // namespace

BatchGrad GradParams(const ModelArtifact& model, const Batch& batch) {
  const std::size_t n = batch.size();
  if (batch.inputs.size() != n * batch.sample_size) {
    throw ShapeError("batch holds " + std::to_string(batch.inputs.size()) + " values for " +
                     std::to_string(n) + " samples of " + std::to_string(batch.sample_size));
  }
  return AccumulateBatch(
      model, batch.inputs, batch.sample_size, n, batch.first_layer,
      [&](std::size_t s, std::span<const double> logits, std::vector<double>& dlogits,
          std::size_t& correct) {
        auto label = static_cast<std::size_t>(batch.labels[s]);
        CrossEntropy ce = SoftmaxCrossEntropy(logits, label);
        auto best = static_cast<std::size_t>(
            std::max_element(logits.begin(), logits.end()) - logits.begin());
        if (best == label) ++correct;
        dlogits = std::move(ce.grad);
        return ce.loss;
      });
}

BatchGrad GradParamsSquared(const ModelArtifact& model, std::span<const double> inputs,
                            std::span<const double> targets) {
  const std::size_t t = model.spec().num_classes;
  const std::size_t d = NumElements(model.spec().input_shape);
  if (targets.size() % t != 0 || inputs.size() != (targets.size() / t) * d) {
    throw ShapeError("squared-loss batch: inputs and targets disagree in sample count");
  }
  const std::size_t n = targets.size() / t;
  return AccumulateBatch(model, inputs, d, n, 0,
                         [&](std::size_t s, std::span<const double> out,
                             std::vector<double>& dout, std::size_t&) {
                           dout.resize(t);
                           double loss = 0.0;
                           for (std::size_t j = 0; j < t; ++j) {
                             double r = out[j] - targets[s * t + j];
                             loss += r * r;
                             dout[j] = 2.0 * r;
                           }
                           return loss;
                         });
}

UpdateResult ApplyUpdate(const ParamSet& params, const ParamSet& grads, double lr,
                         Direction direction, const std::vector<bool>& trainable) {
  if (!(lr > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (params.size() != grads.size()) throw ShapeError("gradient layer count mismatch");
  if (!trainable.empty() && trainable.size() != params.size()) {
    throw ShapeError("trainable mask length mismatch");
  }
  const double step = direction == Direction::kDescent ? -lr : lr;
  UpdateResult out{params, ZerosLike(params)};
  for (std::size_t l = 0; l < params.size(); ++l) {
    if (params[l].size() != grads[l].size()) {
      throw ShapeError("layer " + std::to_string(l) + ": gradient tensor count mismatch");
    }
    bool train = trainable.empty() || trainable[l];
    for (std::size_t j = 0; j < params[l].size(); ++j) {
      if (params[l][j].shape() != grads[l][j].shape()) {
        throw ShapeError("layer " + std::to_string(l) + ": gradient shape " +
                         ShapeString(grads[l][j].shape()) + " does not match parameter " +
                         ShapeString(params[l][j].shape()));
      }
      if (!train) continue;
      auto g = grads[l][j].values();
      auto d = out.delta[l][j].values();
      auto p = out.params[l][j].values();
      for (std::size_t i = 0; i < g.size(); ++i) {
        d[i] = step * g[i];
        p[i] += d[i];
      }
    }
  }
  return out;
}

}  // namespace ulk
