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

#pragma once

// Dense double-precision kernels behind the MLP engine.
//
// Every kernel has a portable scalar reference and, on x86-64, an AVX2/FMA
// variant. The variant is picked once at startup from CPUID; the choice can
// be overridden with SECPREC_KERNELS=scalar|avx2 or set_backend(). All
// matrices are row-major with an explicit leading dimension.

#include <cstddef>
#include <string_view>

namespace secprec::kernels {

enum class Backend { scalar, avx2 };

struct AdamCoeffs {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double inv_bias1;  // 1 / (1 - beta1^t)
  double inv_bias2;  // 1 / (1 - beta2^t)
};

struct KernelTable {
  Backend backend;
  const char* name;

  // C[m x n] (+)= A[m x k] * B[k x n]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate);
  // y[rows] = W[rows x cols] * x + bias (bias may be null)
  void (*gemv)(std::size_t rows, std::size_t cols, const double* w, const double* x,
               const double* bias, double* y);
  // Row-wise y[i][j] += bias[j], then optional max(0, .)
  void (*bias_act)(std::size_t m, std::size_t n, const double* bias, double* y, std::size_t ldy,
                   bool relu);
  // grad[i] = act[i] > 0 ? grad[i] : 0
  void (*relu_mask)(std::size_t count, const double* act, double* grad);
  // out[j] (+)= sum_i a[i][j]
  void (*col_sum)(std::size_t m, std::size_t n, const double* a, std::size_t lda, double* out,
                  bool accumulate);
  // One Adam update over a flat parameter block.
  void (*adam_step)(std::size_t count, double* param, const double* grad, double* m, double* v,
                    const AdamCoeffs& coeffs);
  double (*dot)(std::size_t n, const double* x, const double* y);
};

const KernelTable& scalar_table();
// Null when the variant was not compiled in or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table();

// Currently selected table.
const KernelTable& active();
Backend active_backend();
// Throws std::runtime_error when the backend is unavailable on this machine.
void set_backend(Backend backend);
bool backend_available(Backend backend);
std::string_view backend_name(Backend backend);

// Out-of-place transpose: dst[cols x rows] = src[rows x cols]^T.
void transpose(std::size_t rows, std::size_t cols, const double* src, std::size_t lds, double* dst,
               std::size_t ldd);

inline void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                    const double* b, std::size_t ldb, double* c, std::size_t ldc,
                    bool accumulate) {
  active().gemm_nn(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}
inline void gemv(std::size_t rows, std::size_t cols, const double* w, const double* x,
                 const double* bias, double* y) {
  active().gemv(rows, cols, w, x, bias, y);
}
inline void bias_act(std::size_t m, std::size_t n, const double* bias, double* y, std::size_t ldy,
                     bool relu) {
  active().bias_act(m, n, bias, y, ldy, relu);
}
inline void relu_mask(std::size_t count, const double* act, double* grad) {
  active().relu_mask(count, act, grad);
}
inline void col_sum(std::size_t m, std::size_t n, const double* a, std::size_t lda, double* out,
                    bool accumulate) {
  active().col_sum(m, n, a, lda, out, accumulate);
}
inline void adam_step(std::size_t count, double* param, const double* grad, double* m, double* v,
                      const AdamCoeffs& coeffs) {
  active().adam_step(count, param, grad, m, v, coeffs);
}
inline double dot(std::size_t n, const double* x, const double* y) {
  return active().dot(n, x, y);
}

}  // namespace secprec::kernels
