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

#ifndef ULK_COMMON_RNG_H_
#define ULK_COMMON_RNG_H_

#include <cstdint>
#include <span>

namespace ulk {

// Counter-based generator: the n-th output is a pure function of (key, n),
// so streams can be split into independent children without sharing state.
// Distributions are implemented here rather than with <random> so results
// are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(Mix(seed ^ 0x5851f42d4c957f2dULL)) {}

  // Independent child stream identified by `tag`. Does not advance `*this`.
  Rng Split(std::uint64_t tag) const;

  std::uint64_t NextU64();
  // Uniform in [0, 1) with 53 bits of precision.
  double Uniform();
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t Below(std::uint64_t n);
  // Standard normal via Box-Muller.
  double Normal();

  template <typename T>
  void Shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(Below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  std::uint64_t key() const { return key_; }

  static std::uint64_t Mix(std::uint64_t z);

 private:
  struct FromKey {};
  Rng(FromKey, std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ulk

#endif  // ULK_COMMON_RNG_H_
