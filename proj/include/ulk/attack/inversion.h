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

#ifndef ULK_ATTACK_INVERSION_H_
#define ULK_ATTACK_INVERSION_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ulk/common/rng.h"
#include "ulk/data/dataset.h"
#include "ulk/nn/model.h"

namespace ulk {

struct InversionConfigWB {
  std::size_t inits = 5;      // K
  std::size_t iterations = 300;  // E
  double lr = 0.1;
  double lambda_l2 = 3e-2;
  double lambda_tv = 0.0;
  std::uint64_t seed = 11;

  void Validate() const;
  std::string Describe() const;
};

struct GAConfig {
  std::size_t population = 64;  // N
  std::size_t generations = 150;  // G
  double sigma0 = 0.5;
  double decay = 0.98;
  std::size_t elites = 2;  // k_elite
  std::uint64_t seed = 13;
  // Total queries allowed per target class, including the final one.
  // 0 means exactly the scheduled amount (see ScheduledQueries).
  std::size_t query_budget = 0;
  // Mutate each dimension independently with probability 1/d instead of
  // exactly one dimension per child.
  bool per_dimension_mutation = false;

  void Validate() const;
  std::string Describe() const;
  // N + G * (N - k_elite) + 1.
  std::size_t ScheduledQueries() const;
  double Sigma(std::size_t generation) const;
};

struct InvertedPredictionVector {
  std::size_t target = 0;
  std::vector<double> probs;
  double max_prob = 0.0;
  double fitness = 0.0;  // probs[target]
  std::size_t queries = 0;
  bool truncated = false;
};

// Answers softmax vectors for inputs in [0,1]^d and counts every call.
class QueryOracle {
 public:
  virtual ~QueryOracle() = default;

  std::vector<double> Query(std::span<const double> x);
  std::size_t queries() const { return queries_; }
  virtual std::size_t input_size() const = 0;
  virtual std::size_t num_classes() const = 0;

 protected:
  virtual std::vector<double> Answer(std::span<const double> x) = 0;

 private:
  std::size_t queries_ = 0;
};

// Wraps a model; [0,1]^d is mapped affinely onto `domain` before evaluation.
class ModelOracle : public QueryOracle {
 public:
  ModelOracle(ModelArtifact model, InputDomain domain = {});
  std::size_t input_size() const override;
  std::size_t num_classes() const override;

 protected:
  std::vector<double> Answer(std::span<const double> x) override;

 private:
  ModelArtifact model_;
  InputDomain domain_;
  std::vector<double> scratch_;
};

struct WhiteboxTrace {
  std::vector<double> initial_loss;  // per init
  std::vector<double> final_loss;
  std::vector<double> final_ce;
  std::vector<bool> diverged;
  std::size_t selected = 0;
  std::vector<double> best_input;
};

// K gradient-descent runs from N(0, I) on CE + l2 + tv; the run with the
// lowest final CE is kept. Diverged runs are dropped; DivergedError if all are.
InvertedPredictionVector InvertWhitebox(const ModelArtifact& model, std::size_t target,
                                        const InversionConfigWB& cfg, WhiteboxTrace* trace = nullptr);

double GaFitness(QueryOracle& oracle, std::span<const double> x, std::size_t target);
// First `cut` genes from p1, the rest from p2; cut in [1, d].
std::vector<double> GaCrossover(std::span<const double> p1, std::span<const double> p2, std::size_t cut);
// Adds sigma * N(0,1) to one uniformly chosen gene, then clamps to [0,1].
void GaMutate(std::span<double> child, double sigma, Rng& rng);
void GaMutatePerDimension(std::span<double> child, double sigma, Rng& rng);

struct GaTrace {
  std::vector<double> best_fitness;  // entry g: after generation g (entry 0 = initial population)
  std::vector<double> best_input;
};

InvertedPredictionVector InvertBlackbox(QueryOracle& oracle, std::size_t target, const GAConfig& cfg,
                                        GaTrace* trace = nullptr);

using IpvSet = std::vector<InvertedPredictionVector>;

IpvSet BuildIpvSetWhitebox(const ModelArtifact& model, const InversionConfigWB& cfg);
// `traces`, when given, receives one GaTrace per class.
IpvSet BuildIpvSetBlackbox(QueryOracle& oracle, const GAConfig& cfg, std::vector<GaTrace>* traces = nullptr);

// Checks simplex and max_prob consistency.
void ValidateIpv(const InvertedPredictionVector& ipv);

// Columns: t,p0..p{T-1},max_prob,fitness,queries.
void WriteIpvCsv(const std::filesystem::path& path, const IpvSet& set);
std::string EncodeIpvCsv(const IpvSet& set);
IpvSet ParseIpvCsv(const std::string& text);
IpvSet ReadIpvCsv(const std::filesystem::path& path);

}  // namespace ulk

#endif  // ULK_ATTACK_INVERSION_H_
