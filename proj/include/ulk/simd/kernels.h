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

#ifndef ULK_SIMD_KERNELS_H_
#define ULK_SIMD_KERNELS_H_

#include <cstddef>
#include <span>
#include <string_view>

// Dense double-precision inner loops used by the autodiff engine. Each ISA
// provides the same table; the scalar table is the reference that every
// vector variant is tested against.
namespace ulk::simd {

enum class Isa { kScalar, kAvx2, kNeon };

struct KernelTable {
  Isa isa;
  const char* name;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = W x + bias, W is rows x cols row-major, bias may be null.
  void (*gemv)(const double* w, const double* x, const double* bias, double* y,
               std::size_t rows, std::size_t cols);
  // x_grad += W^T g
  void (*gemv_t_acc)(const double* w, const double* g, double* x_grad,
                     std::size_t rows, std::size_t cols);
  // w_grad += g x^T
  void (*outer_acc)(const double* g, const double* x, double* w_grad,
                    std::size_t rows, std::size_t cols);
};

const KernelTable& ScalarKernels();
// Null when the ISA was not compiled in or the CPU lacks it.
const KernelTable* Avx2Kernels();
const KernelTable* NeonKernels();

// Best table for this CPU, chosen once. ULK_SIMD=scalar forces the reference
// path.
const KernelTable& Active();
// Overrides the active table for the rest of the process (tests, benchmarks).
void SetActive(Isa isa);
std::string_view ActiveName();

inline double Dot(std::span<const double> a, std::span<const double> b) {
  return Active().dot(a.data(), b.data(), a.size());
}
inline void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  Active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace ulk::simd

#endif  // ULK_SIMD_KERNELS_H_
