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

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "secprec/kernels.hpp"
#include "secprec/random.hpp"

using namespace secprec;
namespace k = secprec::kernels;

namespace {

std::vector<double> randv(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

// Summation order differs between backends; compare relative to magnitude.
void check_close(const std::vector<double>& a, const std::vector<double>& b, double scale) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a[i] - b[i]) <= 1e-12 * scale);
  }
}

const k::KernelTable* simd() { return k::avx2_table(); }

}  // namespace

TEST_CASE("scalar gemm matches a naive triple loop") {
  Rng rng(1);
  const std::size_t m = 5, n = 7, kk = 3;
  auto a = randv(rng, m * kk), b = randv(rng, kk * n);
  std::vector<double> c(m * n, 1.0);
  k::scalar_table().gemm_nn(m, n, kk, a.data(), kk, b.data(), n, c.data(), n, true);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 1.0;
      for (std::size_t p = 0; p < kk; ++p) s += a[i * kk + p] * b[p * n + j];
      CHECK(c[i * n + j] == doctest::Approx(s).epsilon(1e-14));
    }
  }
}

TEST_CASE("backend selection") {
  CHECK(k::backend_available(k::Backend::scalar));
  const k::Backend before = k::active_backend();
  k::set_backend(k::Backend::scalar);
  CHECK(k::active_backend() == k::Backend::scalar);
  if (!k::backend_available(k::Backend::avx2)) {
    CHECK_THROWS(k::set_backend(k::Backend::avx2));
  }
  k::set_backend(before);
  CHECK(k::backend_name(k::Backend::avx2) == "avx2");
}

TEST_CASE("transpose") {
  std::vector<double> src{1, 2, 3, 4, 5, 6};
  std::vector<double> dst(6);
  k::transpose(2, 3, src.data(), 3, dst.data(), 2);
  CHECK(dst == std::vector<double>{1, 4, 2, 5, 3, 6});
}

TEST_CASE("avx2 kernels agree with scalar reference") {
  if (!simd()) {
    MESSAGE("avx2 backend unavailable; skipping");
    return;
  }
  const k::KernelTable& s = k::scalar_table();
  const k::KernelTable& v = *simd();
  Rng rng(2);

  SUBCASE("gemm over tile remainders") {
    for (std::size_t m : {1u, 3u, 4u, 5u, 9u}) {
      for (std::size_t n : {1u, 3u, 4u, 11u, 12u, 13u, 27u}) {
        for (std::size_t kk : {0u, 1u, 7u, 300u}) {
          const std::size_t lda = kk + 2, ldb = n + 1, ldc = n + 3;
          auto a = randv(rng, m * lda), b = randv(rng, std::max<std::size_t>(kk, 1) * ldb);
          auto c0 = randv(rng, m * ldc);
          for (bool acc : {false, true}) {
            auto c1 = c0, c2 = c0;
            s.gemm_nn(m, n, kk, a.data(), lda, b.data(), ldb, c1.data(), ldc, acc);
            v.gemm_nn(m, n, kk, a.data(), lda, b.data(), ldb, c2.data(), ldc, acc);
            check_close(c1, c2, 1.0 + std::sqrt(static_cast<double>(kk)) * 4.0);
          }
        }
      }
    }
  }
  SUBCASE("gemv with and without bias") {
    for (std::size_t rows : {1u, 4u, 7u, 64u}) {
      for (std::size_t cols : {1u, 3u, 8u, 9u, 257u}) {
        auto w = randv(rng, rows * cols), x = randv(rng, cols), bias = randv(rng, rows);
        for (const double* bp : std::vector<const double*>{nullptr, bias.data()}) {
          std::vector<double> y1(rows), y2(rows);
          s.gemv(rows, cols, w.data(), x.data(), bp, y1.data());
          v.gemv(rows, cols, w.data(), x.data(), bp, y2.data());
          check_close(y1, y2, 1.0 + std::sqrt(static_cast<double>(cols)) * 4.0);
        }
      }
    }
  }
  SUBCASE("elementwise kernels are bit-identical") {
    for (std::size_t n : {1u, 3u, 4u, 5u, 17u, 256u}) {
      const std::size_t m = 3, ld = n + 2;
      auto bias = randv(rng, n);
      auto y = randv(rng, m * ld);
      y[0] = std::nan("");
      for (bool relu : {false, true}) {
        auto y1 = y, y2 = y;
        s.bias_act(m, n, bias.data(), y1.data(), ld, relu);
        v.bias_act(m, n, bias.data(), y2.data(), ld, relu);
        for (std::size_t i = 1; i < y1.size(); ++i) CHECK(y1[i] == y2[i]);
        CHECK(std::isnan(y1[0]) == std::isnan(y2[0]));
      }
      auto act = randv(rng, n), g = randv(rng, n);
      auto g1 = g, g2 = g;
      s.relu_mask(n, act.data(), g1.data());
      v.relu_mask(n, act.data(), g2.data());
      CHECK(g1 == g2);

      auto a = randv(rng, m * ld);
      std::vector<double> o1(n, 0.5), o2(n, 0.5);
      s.col_sum(m, n, a.data(), ld, o1.data(), true);
      v.col_sum(m, n, a.data(), ld, o2.data(), true);
      check_close(o1, o2, 10.0);
    }
  }
  SUBCASE("adam step and dot") {
    for (std::size_t n : {1u, 2u, 7u, 8u, 1001u}) {
      auto p = randv(rng, n), g = randv(rng, n), m1 = randv(rng, n), v1 = randv(rng, n);
      for (double& x : v1) x = x * x;
      auto p2 = p, m2 = m1, v2 = v1;
      const k::AdamCoeffs c{1e-3, 0.9, 0.999, 1e-8, 1.0 / (1.0 - 0.9), 1.0 / (1.0 - 0.999)};
      s.adam_step(n, p.data(), g.data(), m1.data(), v1.data(), c);
      v.adam_step(n, p2.data(), g.data(), m2.data(), v2.data(), c);
      check_close(p, p2, 1.0);
      check_close(m1, m2, 1.0);
      check_close(v1, v2, 1.0);
      CHECK(s.dot(n, g.data(), p.data()) ==
            doctest::Approx(v.dot(n, g.data(), p.data())).epsilon(1e-12).scale(std::sqrt(double(n))));
    }
  }
}
