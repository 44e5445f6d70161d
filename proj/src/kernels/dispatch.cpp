// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "secprec/kernels.hpp"

namespace secprec::kernels {

#if defined(SECPREC_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

namespace {

bool cpu_has_avx2() {
#if defined(SECPREC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* detect() {
  const KernelTable* best = avx2_table() ? avx2_table() : &scalar_table();
  if (const char* env = std::getenv("SECPREC_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return &scalar_table();
    if (want == "avx2" && avx2_table()) return avx2_table();
  }
  return best;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

const KernelTable* avx2_table() {
#if defined(SECPREC_HAVE_AVX2)
  static const bool ok = cpu_has_avx2();
  return ok ? &kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

Backend active_backend() { return active().backend; }

bool backend_available(Backend backend) {
  return backend == Backend::scalar || avx2_table() != nullptr;
}

void set_backend(Backend backend) {
  if (backend == Backend::scalar) {
    current().store(&scalar_table());
    return;
  }
  const KernelTable* t = avx2_table();
  if (!t) throw std::runtime_error("avx2 kernels are not available on this machine");
  current().store(t);
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::scalar ? "scalar" : "avx2";
}

void transpose(std::size_t rows, std::size_t cols, const double* src, std::size_t lds, double* dst,
               std::size_t ldd) {
  constexpr std::size_t blk = 16;
  for (std::size_t i0 = 0; i0 < rows; i0 += blk) {
    const std::size_t i1 = i0 + blk < rows ? i0 + blk : rows;
    for (std::size_t j0 = 0; j0 < cols; j0 += blk) {
      const std::size_t j1 = j0 + blk < cols ? j0 + blk : cols;
      for (std::size_t i = i0; i < i1; ++i) {
        for (std::size_t j = j0; j < j1; ++j) dst[j * ldd + i] = src[i * lds + j];
      }
    }
  }
}

}  // namespace secprec::kernels
