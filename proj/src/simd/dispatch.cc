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

#include <atomic>
#include <cstdlib>
#include <string>

#include "ulk/common/error.h"
#include "ulk/simd/kernels.h"

namespace ulk::simd {
namespace {

const KernelTable* Detect() {
  if (const char* env = std::getenv("ULK_SIMD"); env != nullptr) {
    std::string want(env);
    if (want == "scalar") return &ScalarKernels();
    if (want == "avx2" && Avx2Kernels() != nullptr) return Avx2Kernels();
    if (want == "neon" && NeonKernels() != nullptr) return NeonKernels();
  }
  if (const KernelTable* t = Avx2Kernels()) return t;
  if (const KernelTable* t = NeonKernels()) return t;
  return &ScalarKernels();
}

std::atomic<const KernelTable*>& Slot() {
  static std::atomic<const KernelTable*> slot{Detect()};
  return slot;
}

}  // namespace

const KernelTable& Active() { return *Slot().load(std::memory_order_relaxed); }

void SetActive(Isa isa) {
  const KernelTable* table = nullptr;
  switch (isa) {
    case Isa::kScalar: table = &ScalarKernels(); break;
    case Isa::kAvx2: table = Avx2Kernels(); break;
    case Isa::kNeon: table = NeonKernels(); break;
  }
  if (table == nullptr) throw InvalidArgument("requested ISA is not available on this CPU");
  Slot().store(table, std::memory_order_relaxed);
}

std::string_view ActiveName() { return Active().name; }

}  // namespace ulk::simd
