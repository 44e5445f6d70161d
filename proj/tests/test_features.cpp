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

#include "secprec/channels.hpp"
#include "secprec/features.hpp"
#include "test_util.hpp"

using namespace secprec;
using secprec::test::max_abs_diff;

TEST_CASE("feature vector arithmetic") {
  const ChannelPair ch{Matrix{{1}}, Matrix{{2}}};
  const std::vector<double> v = build_input(ch);
  const std::vector<double> expect{0.05, 0.2, 0.002, 0.008, 0.008, 0.032};
  REQUIRE(v.size() == expect.size());
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == doctest::Approx(expect[i]).epsilon(1e-15));

  const std::vector<double> zero = build_input(ChannelPair{Matrix(1, 3), Matrix(1, 3)});
  CHECK(zero.size() == 54);
  for (double x : zero) CHECK(x == 0.0);

  CHECK(feature_length(2) == 24);
  CHECK(feature_length(3) == 54);
  CHECK(build_input(sample_channel_pair(2, 1, 1, 0)).size() == 24);
  std::vector<double> wrong(10);
  CHECK_THROWS(build_input(sample_channel_pair(2, 1, 1, 0), wrong));
}

TEST_CASE("feature layout on a 2x2 example") {
  // G = [H1^T H1  H2^T H2], vectorized column by column.
  const ChannelPair ch{Matrix{{1, 2}}, Matrix{{0, 3}}};
  const std::vector<double> v = build_input(ch);
  const Matrix g{{1, 2, 0, 0}, {2, 4, 0, 9}};
  const Matrix gtg = g.transposed() * g;
  std::size_t k = 0;
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t r = 0; r < 2; ++r) CHECK(v[k++] == doctest::Approx(0.05 * g(r, c)));
  }
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t r = 0; r < 4; ++r) CHECK(v[k++] == doctest::Approx(0.002 * gtg(r, c)));
  }
}

TEST_CASE("feature range for standard channels") {
  for (std::size_t nt : {2u, 3u}) {
    std::size_t inside = 0, total = 0;
    for (const ChannelPair& ch : sample_channel_set(Dims{nt, 1, 1}, 1000, 5)) {
      for (double x : build_input(ch)) {
        inside += std::abs(x) <= 1.0;
        ++total;
      }
    }
    CHECK(static_cast<double>(inside) >= 0.99 * static_cast<double>(total));
  }
}

TEST_CASE("label packing") {
  const CovariancePair q{SymMatrix::diagonal({1.0, 2.0}), SymMatrix{{0.5, 0.1}, {0.1, 0.3}}, 10.0};
  CHECK(pack_labels(q) == std::vector<double>{1, 0, 2, 0.5, 0.1, 0.3});
  CHECK(label_length(2) == 6);
  CHECK(label_length(3) == 12);

  const CovariancePair back = unpack_labels(pack_labels(q), 2, 10.0);
  CHECK(back.q1 == q.q1);
  CHECK(back.q2 == q.q2);
  CHECK(back.power == 10.0);
  CHECK_THROWS_AS(unpack_labels(std::vector<double>(5), 2, 10.0), std::invalid_argument);
}

TEST_CASE("unpacking repairs infeasible predictions") {
  // q1 = [[1, 2], [2, 1]] has eigenvalue -1.
  const std::vector<double> labels{1, 2, 1, 0.5, 0.0, -1e-3};
  const CovariancePair q = unpack_labels(labels, 2, 10.0);
  CHECK(min_eigenvalue(q.q1) >= -1e-12);
  CHECK(min_eigenvalue(q.q2) >= -1e-12);
  CHECK(q.feasible());

  const std::vector<double> big{8, 0, 8, 4, 0, 4};
  const CovariancePair s = unpack_labels(big, 2, 12.0);
  CHECK(s.q1.trace() + s.q2.trace() == doctest::Approx(12.0));
  CHECK(max_abs_diff(s.q1, SymMatrix::diagonal({4.0, 4.0})) < 1e-12);

  Rng rng(51);
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> l(12);
    for (double& x : l) x = 4.0 * rng.normal();
    CHECK(unpack_labels(l, 3, 10.0).feasible());
  }
}
