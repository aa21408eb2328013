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

#ifndef ULK_NN_AUTODIFF_H_
#define ULK_NN_AUTODIFF_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ulk/nn/model.h"
#include "ulk/nn/tensor.h"

namespace ulk {

// Ordered record of one forward pass: the input seen by every layer plus the
// argmax indices of each max-pool. Backward replays it in reverse.
struct Tape {
  std::size_t first_layer = 0;
  std::vector<Tensor> inputs;                      // inputs[i - first_layer]
  std::vector<std::vector<std::uint32_t>> argmax;  // parallel to inputs
  Tensor output;
};

// Runs layers [begin, end). `input` must match layers[begin].in_shape in
// element count; the error names the offending layer otherwise.
Tensor ForwardRange(const ModelArtifact& model, std::size_t begin, std::size_t end,
                    std::span<const double> input, Tape* tape = nullptr);

// Logits of the full model (length T).
Tensor Forward(const ModelArtifact& model, std::span<const double> input, Tape* tape = nullptr);
// As above, but also checks the input tensor's shape against the spec.
Tensor Forward(const ModelArtifact& model, const Tensor& input, Tape* tape = nullptr);

struct GradientBundle {
  ParamSet param_grads;  // mirrors model.params(); frozen layers hold zeros
  std::optional<Tensor> input_grad;
};

// Reverse pass over the layers recorded in `tape`, seeded with d(loss)/d(output).
GradientBundle Backward(const ModelArtifact& model, const Tape& tape,
                        std::span<const double> output_grad, bool want_input_grad);

// ---- losses ---------------------------------------------------------------

std::vector<double> Softmax(std::span<const double> logits);

struct CrossEntropy {
  double loss = 0.0;
  std::vector<double> probs;
  std::vector<double> grad;  // d loss / d logits = probs - onehot
};
// Fused log-sum-exp softmax cross-entropy. Throws InvalidArgument when
// target >= logits.size().
CrossEntropy SoftmaxCrossEntropy(std::span<const double> logits, std::size_t target);

// ||x||^2
double L2Penalty(std::span<const double> x);

// Anisotropic squared total variation: sum over channels of squared
// differences between horizontal and vertical neighbours. Rank-1 inputs are
// treated as a single 1 x d row.
double TvPenalty(const Tensor& x);
// Adds scale * d TV / dx to grad.
void AccumulateTvGrad(const Tensor& x, double scale, std::span<double> grad);

struct InversionObjective {
  std::size_t target = 0;
  double lambda_l2 = 0.0;
  double lambda_tv = 0.0;
};

struct LossEval {
  double total = 0.0;
  double ce = 0.0;
  std::vector<double> logits;
  Tensor grad;  // d total / d x; empty unless requested
};

// CE(M(x), target) + lambda_l2 ||x||^2 + lambda_tv TV(x).
LossEval EvaluateInversionLoss(const ModelArtifact& model, const Tensor& x,
                               const InversionObjective& objective, bool with_grad);

double LossTotal(const ModelArtifact& model, const Tensor& x, std::size_t target,
                 double lambda_l2, double lambda_tv);
Tensor GradInput(const ModelArtifact& model, const Tensor& x, std::size_t target,
                 double lambda_l2, double lambda_tv);

// ---- parameter gradients --------------------------------------------------

// Mean cross-entropy over a batch of flattened samples and their labels.
// Layers before `first_layer` are skipped entirely: inputs are then the
// activations entering that layer.
struct Batch {
  std::span<const double> inputs;  // n * sample_size values
  std::size_t sample_size = 0;
  std::span<const int> labels;
  std::size_t first_layer = 0;
  std::size_t size() const { return labels.size(); }
};

struct BatchGrad {
  double mean_loss = 0.0;
  std::size_t correct = 0;
  GradientBundle grads;
};

BatchGrad GradParams(const ModelArtifact& model, const Batch& batch);

// Mean squared error sum_j (out_j - target_j)^2 against real-valued targets
// (n * T values).
BatchGrad GradParamsSquared(const ModelArtifact& model, std::span<const double> inputs,
                            std::span<const double> targets);

enum class Direction { kDescent, kAscent };

struct UpdateResult {
  ParamSet params;
  ParamSet delta;  // params - old params
};

// w' = w -/+ lr * g for every layer marked trainable (all, when the mask is
// empty). Non-trainable layers get a zero delta.
UpdateResult ApplyUpdate(const ParamSet& params, const ParamSet& grads, double lr,
                         Direction direction, const std::vector<bool>& trainable = {});

ParamSet ZerosLike(const ParamSet& params);

}  // namespace ulk

#endif  // ULK_NN_AUTODIFF_H_
