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

#include "secprec/features.hpp"

#include <stdexcept>
#include <string>

namespace secprec {

void build_input(const ChannelPair& ch, std::span<double> out) {
  const std::size_t n = ch.nt();
  if (out.size() != feature_length(n)) throw std::invalid_argument("build_input: output span has wrong length");
  const SymMatrix a = gram(ch.h1);
  const SymMatrix b = gram(ch.h2);
  auto g = [&](std::size_t r, std::size_t c) { return c < n ? a(r, c) : b(r, c - n); };

  std::size_t idx = 0;
  for (std::size_t c = 0; c < 2 * n; ++c) {
    for (std::size_t r = 0; r < n; ++r) out[idx++] = kFeatureScaleLinear * g(r, c);
  }
  // (G^T G)(r, c) = sum_k G(k, r) G(k, c), a 2nt x 2nt matrix.
  for (std::size_t c = 0; c < 2 * n; ++c) {
    for (std::size_t r = 0; r < 2 * n; ++r) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += g(k, r) * g(k, c);
      out[idx++] = kFeatureScaleQuadratic * s;
    }
  }
}

std::vector<double> build_input(const ChannelPair& ch) {
  std::vector<double> v(feature_length(ch.nt()));
  build_input(ch, v);
  return v;
}

std::vector<double> pack_labels(const CovariancePair& q) {
  const std::size_t n = q.q1.dim();
  if (q.q2.dim() != n) throw std::invalid_argument("pack_labels: dimension mismatch");
  std::vector<double> out;
  out.reserve(label_length(n));
  for (const SymMatrix* m : {&q.q1, &q.q2}) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = r; c < n; ++c) out.push_back((*m)(r, c));
    }
  }
  return out;
}

CovariancePair unpack_labels(std::span<const double> labels, std::size_t nt, double power) {
  if (labels.size() != label_length(nt)) {
    throw std::invalid_argument("unpack_labels: expected " + std::to_string(label_length(nt)) +
                                " values, got " + std::to_string(labels.size()));
  }
  if (!(power >= 0.0)) throw std::invalid_argument("unpack_labels: negative power");
  std::size_t idx = 0;
  auto read = [&] {
    SymMatrix m(nt);
    for (std::size_t r = 0; r < nt; ++r) {
      for (std::size_t c = r; c < nt; ++c) m.set(r, c, labels[idx++]);
    }
    return project_psd(m);
  };
  CovariancePair out;
  out.q1 = read();
  out.q2 = read();
  out.power = power;
  const double tr = out.q1.trace() + out.q2.trace();
  if (tr > power) {
    const double s = power / tr;
    out.q1 *= s;
    out.q2 *= s;
  }
  return out;
}

}  // namespace secprec
