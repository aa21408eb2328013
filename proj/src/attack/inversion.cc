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

#include "ulk/attack/inversion.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "ulk/common/error.h"
#include "ulk/common/text.h"
#include "ulk/nn/autodiff.h"
#include "ulk/nn/checkpoint.h"

namespace ulk {

void InversionConfigWB::Validate() const {
  if (inits < 1) throw InvalidArgument("inversion needs at least one init (K >= 1)");
  if (!(lr > 0.0)) throw InvalidArgument("inversion lr must be > 0");
  if (!(lambda_l2 >= 0.0) || !(lambda_tv >= 0.0)) {
    throw InvalidArgument("inversion regularization weights must be >= 0");
  }
}

std::string InversionConfigWB::Describe() const {
  return fmt::format("K={} E={} lr={} l2={} tv={} seed={}", inits, iterations, lr, lambda_l2, lambda_tv,
                     seed);
}

void GAConfig::Validate() const {
  if (population < 4) throw InvalidArgument("GA population must be >= 4");
  if (!(decay > 0.0 && decay < 1.0)) throw InvalidArgument("GA decay must lie in (0, 1)");
  if (elites < 1 || elites >= population) {
    throw InvalidArgument("GA elite count must lie in [1, population)");
  }
  if (!(sigma0 >= 0.0)) throw InvalidArgument("GA sigma0 must be >= 0");
  if (query_budget != 0 && query_budget < population + 1) {
    throw InvalidArgument(fmt::format("GA query budget {} cannot cover the initial population of {}",
                                      query_budget, population));
  }
}

std::string GAConfig::Describe() const {
  return fmt::format("N={} G={} sigma0={} decay={} elites={} seed={} budget={} per_dim={}", population,
                     generations, sigma0, decay, elites, seed, query_budget,
                     per_dimension_mutation ? 1 : 0);
}

std::size_t GAConfig::ScheduledQueries() const {
  return population + generations * (population - elites) + 1;
}

double GAConfig::Sigma(std::size_t generation) const {
  return sigma0 * std::pow(decay, static_cast<double>(generation));
}

std::vector<double> QueryOracle::Query(std::span<const double> x) {
  ++queries_;
  return Answer(x);
}

ModelOracle::ModelOracle(ModelArtifact model, InputDomain domain)
    : model_(std::move(model)), domain_(domain), scratch_(NumElements(model_.spec().input_shape)) {}

std::size_t ModelOracle::input_size() const { return scratch_.size(); }
std::size_t ModelOracle::num_classes() const { return model_.spec().num_classes; }

std::vector<double> ModelOracle::Answer(std::span<const double> x) {
  if (x.size() != scratch_.size()) {
    throw ShapeError(fmt::format("oracle input has {} values, model expects {}", x.size(), scratch_.size()));
  }
  const double width = domain_.hi - domain_.lo;
  for (std::size_t i = 0; i < x.size(); ++i) scratch_[i] = domain_.lo + x[i] * width;
  Tensor logits = Forward(model_, scratch_);
  return Softmax(logits.values());
}

namespace {

InvertedPredictionVector MakeIpv(std::size_t target, std::vector<double> probs) {
  InvertedPredictionVector ipv;
  ipv.target = target;
  ipv.max_prob = *std::max_element(probs.begin(), probs.end());
  ipv.fitness = probs[target];
  ipv.probs = std::move(probs);
  return ipv;
}

void CheckTarget(std::size_t target, std::size_t num_classes) {
  if (target >= num_classes) {
    throw InvalidArgument(fmt::format("target class {} out of range [0,{})", target, num_classes));
  }
}

}  // namespace

InvertedPredictionVector InvertWhitebox(const ModelArtifact& model, std::size_t target,
                                        const InversionConfigWB& cfg, WhiteboxTrace* trace) {
  cfg.Validate();
  CheckTarget(target, model.spec().num_classes);
  const Shape& shape = model.spec().input_shape;
  const InversionObjective objective{target, cfg.lambda_l2, cfg.lambda_tv};
  WhiteboxTrace local;
  WhiteboxTrace& tr = trace != nullptr ? *trace : local;
  tr = {};
  Rng base = Rng(cfg.seed).Split(target);
  bool have = false;
  double best_ce = 0.0;
  Tensor best;
  for (std::size_t k = 0; k < cfg.inits; ++k) {
    Rng rng = base.Split(k);
    Tensor x(shape);
    for (double& v : x.values()) v = rng.Normal();
    LossEval eval = EvaluateInversionLoss(model, x, objective, true);
    tr.initial_loss.push_back(eval.total);
    bool diverged = !std::isfinite(eval.total);
    for (std::size_t e = 0; e < cfg.iterations && !diverged; ++e) {
      auto xv = x.values();
      auto g = eval.grad.values();
      for (std::size_t i = 0; i < xv.size(); ++i) xv[i] -= cfg.lr * g[i];
      eval = EvaluateInversionLoss(model, x, objective, e + 1 < cfg.iterations);
      diverged = !std::isfinite(eval.total) || !x.AllFinite();
    }
    tr.final_loss.push_back(eval.total);
    tr.final_ce.push_back(eval.ce);
    tr.diverged.push_back(diverged);
    if (diverged) continue;
    if (!have || eval.ce < best_ce) {
      have = true;
      best_ce = eval.ce;
      best = x;
      tr.selected = k;
    }
  }
  if (!have) {
    throw DivergedError(fmt::format("all {} inversion inits diverged for class {}", cfg.inits, target));
  }
  tr.best_input = best.vec();
  Tensor logits = Forward(model, best);
  return MakeIpv(target, Softmax(logits.values()));
}

double GaFitness(QueryOracle& oracle, std::span<const double> x, std::size_t target) {
  std::vector<double> p = oracle.Query(x);
  CheckTarget(target, p.size());
  return p[target];
}

std::vector<double> GaCrossover(std::span<const double> p1, std::span<const double> p2, std::size_t cut) {
  if (p1.size() != p2.size()) throw ShapeError("crossover parents differ in length");
  if (cut < 1 || cut > p1.size()) {
    throw InvalidArgument(fmt::format("crossover cut {} outside [1,{}]", cut, p1.size()));
  }
  std::vector<double> child(p1.begin(), p1.end());
  std::copy(p2.begin() + static_cast<std::ptrdiff_t>(cut), p2.end(),
            child.begin() + static_cast<std::ptrdiff_t>(cut));
  return child;
}

namespace {

double Clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

void GaMutate(std::span<double> child, double sigma, Rng& rng) {
  if (child.empty()) return;
  std::size_t j = rng.Below(child.size());
  double eps = rng.Normal();
  child[j] += sigma * eps;
  for (double& v : child) v = Clamp01(v);
}

void GaMutatePerDimension(std::span<double> child, double sigma, Rng& rng) {
  const double rate = 1.0 / static_cast<double>(std::max<std::size_t>(child.size(), 1));
  for (double& v : child) {
    if (rng.Uniform() < rate) v += sigma * rng.Normal();
  }
  for (double& v : child) v = Clamp01(v);
}

InvertedPredictionVector InvertBlackbox(QueryOracle& oracle, std::size_t target, const GAConfig& cfg,
                                        GaTrace* trace) {
  cfg.Validate();
  CheckTarget(target, oracle.num_classes());
  const std::size_t d = oracle.input_size();
  const std::size_t n = cfg.population;
  const std::size_t budget = cfg.query_budget == 0 ? cfg.ScheduledQueries() : cfg.query_budget;
  const std::size_t start = oracle.queries();
  auto used = [&] { return oracle.queries() - start; };
  GaTrace local;
  GaTrace& tr = trace != nullptr ? *trace : local;
  tr = {};
  Rng rng = Rng(cfg.seed).Split(target);

  std::vector<std::vector<double>> pop(n, std::vector<double>(d));
  std::vector<double> fit(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : pop[i]) v = rng.Uniform();
    fit[i] = GaFitness(oracle, pop[i], target);
  }
  auto best_of = [&] {
    return static_cast<std::size_t>(std::max_element(fit.begin(), fit.end()) - fit.begin());
  };
  tr.best_fitness.push_back(fit[best_of()]);

  bool truncated = false;
  std::vector<std::size_t> order(n);
  std::vector<double> cumulative(n);
  for (std::size_t g = 0; g < cfg.generations && !truncated; ++g) {
    const double sigma = cfg.Sigma(g);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += std::max(fit[i], 1e-12);
      cumulative[i] = total;
    }
    auto pick = [&] {
      double r = rng.Uniform() * total;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
      return std::min(static_cast<std::size_t>(it - cumulative.begin()), n - 1);
    };

    std::vector<std::vector<double>> next;
    std::vector<double> next_fit;
    next.reserve(n);
    for (std::size_t e = 0; e < cfg.elites; ++e) {
      next.push_back(pop[order[e]]);
      next_fit.push_back(fit[order[e]]);
    }
    while (next.size() < n) {
      if (used() + 1 >= budget) {  // keep one query for the final readout
        truncated = true;
        break;
      }
      const std::vector<double>& p1 = pop[pick()];
      const std::vector<double>& p2 = pop[pick()];
      std::size_t cut = 1 + rng.Below(d);
      std::vector<double> child = GaCrossover(p1, p2, cut);
      if (cfg.per_dimension_mutation) {
        GaMutatePerDimension(child, sigma, rng);
      } else {
        GaMutate(child, sigma, rng);
      }
      next_fit.push_back(GaFitness(oracle, child, target));
      next.push_back(std::move(child));
    }
    if (truncated) {
      // Partial generation: keep the old population and append what was evaluated.
      for (std::size_t i = cfg.elites; i < next.size(); ++i) {
        pop.push_back(std::move(next[i]));
        fit.push_back(next_fit[i]);
      }
    } else {
      pop = std::move(next);
      fit = std::move(next_fit);
    }
    double best = fit[best_of()];
    if (best < tr.best_fitness.back()) {
      throw Error(fmt::format("GA elitism violated at generation {}: {} < {}", g + 1, best,
                              tr.best_fitness.back()));
    }
    tr.best_fitness.push_back(best);
  }

  std::size_t b = best_of();
  tr.best_input = pop[b];
  InvertedPredictionVector ipv = MakeIpv(target, oracle.Query(pop[b]));
  ipv.queries = used();
  ipv.truncated = truncated;
  return ipv;
}

IpvSet BuildIpvSetWhitebox(const ModelArtifact& model, const InversionConfigWB& cfg) {
  IpvSet out;
  for (std::size_t t = 0; t < model.spec().num_classes; ++t) out.push_back(InvertWhitebox(model, t, cfg));
  return out;
}

IpvSet BuildIpvSetBlackbox(QueryOracle& oracle, const GAConfig& cfg, std::vector<GaTrace>* traces) {
  IpvSet out;
  if (traces != nullptr) traces->assign(oracle.num_classes(), {});
  for (std::size_t t = 0; t < oracle.num_classes(); ++t) {
    out.push_back(InvertBlackbox(oracle, t, cfg, traces != nullptr ? &(*traces)[t] : nullptr));
  }
  return out;
}

void ValidateIpv(const InvertedPredictionVector& ipv) {
  if (ipv.probs.empty()) throw InvalidArgument("IPV has no probabilities");
  double sum = 0.0;
  for (double p : ipv.probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument(fmt::format("IPV probability {} outside [0,1]", p));
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw InvalidArgument(fmt::format("IPV for class {} sums to {}", ipv.target, sum));
  }
  if (ipv.max_prob != *std::max_element(ipv.probs.begin(), ipv.probs.end())) {
    throw InvalidArgument(fmt::format("IPV for class {} has inconsistent max_prob", ipv.target));
  }
  if (ipv.target >= ipv.probs.size()) throw InvalidArgument("IPV target out of range");
}

std::string EncodeIpvCsv(const IpvSet& set) {
  std::string out = "t";
  const std::size_t classes = set.empty() ? 0 : set.front().probs.size();
  for (std::size_t j = 0; j < classes; ++j) out += fmt::format(",p{}", j);
  out += ",max_prob,fitness,queries\n";
  for (const auto& ipv : set) {
    if (ipv.probs.size() != classes) throw ShapeError("IPV set mixes class counts");
    out += fmt::format("{},{},{},{},{}\n", ipv.target, fmt::join(ipv.probs, ","), ipv.max_prob, ipv.fitness,
                       ipv.queries);
  }
  return out;
}

void WriteIpvCsv(const std::filesystem::path& path, const IpvSet& set) {
  std::string text = EncodeIpvCsv(set);
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

IpvSet ParseIpvCsv(const std::string& text) {
  std::vector<std::string> lines = SplitLines(text);
  if (lines.empty()) throw ParseError(1, "missing IPV header");
  std::vector<std::string> header = Split(lines[0], ',');
  if (header.size() < 6 || header.front() != "t" || header[header.size() - 3] != "max_prob" ||
      header[header.size() - 2] != "fitness" || header.back() != "queries") {
    throw ParseError(1, "unexpected IPV header");
  }
  const std::size_t classes = header.size() - 4;
  for (std::size_t j = 0; j < classes; ++j) {
    if (header[1 + j] != fmt::format("p{}", j)) throw ParseError(1, "unexpected IPV header column " + header[1 + j]);
  }
  IpvSet set;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    if (lines[li].empty()) continue;
    std::vector<std::string> cells = Split(lines[li], ',');
    if (cells.size() != header.size()) {
      throw ParseError(line_no, fmt::format("expected {} columns, found {}", header.size(), cells.size()));
    }
    InvertedPredictionVector ipv;
    ipv.target = ParseUintField(cells[0], line_no);
    for (std::size_t j = 0; j < classes; ++j) ipv.probs.push_back(ParseDoubleField(cells[1 + j], line_no));
    ipv.max_prob = ParseDoubleField(cells[1 + classes], line_no);
    ipv.fitness = ParseDoubleField(cells[2 + classes], line_no);
    ipv.queries = ParseUintField(cells[3 + classes], line_no);
    try {
      ValidateIpv(ipv);
    } catch (const InvalidArgument& e) {
      throw ParseError(line_no, e.what());
    }
    set.push_back(std::move(ipv));
  }
  return set;
}

IpvSet ReadIpvCsv(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = ReadFileBytes(path);
  return ParseIpvCsv(std::string(bytes.begin(), bytes.end()));
}

}  // namespace ulk
