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

// Generalized SVD of a channel pair and the analytical precoder built on it.
//
// Factorization (r = rank of [H1; H2]):
//   H1 = U1 diag(sigma1) X^T,   H2 = U2 diag(sigma2) X^T,
//   sigma1_i^2 + sigma2_i^2 = 1,
// with U1, U2 having orthonormal columns wherever the matching sigma is
// nonzero (zero columns otherwise) and X^T the shared r x nt right factor.

#include <vector>

#include "secprec/channels.hpp"
#include "secprec/secrecy_rates.hpp"

namespace secprec {

struct GsvdFactors {
  std::vector<double> sigma1;
  std::vector<double> sigma2;
  Matrix right;  // X^T, r x nt
  Matrix left1;  // U1, n1 x r
  Matrix left2;  // U2, n2 x r

  std::size_t pairs() const { return sigma1.size(); }
  Matrix reconstruct_h1() const;
  Matrix reconstruct_h2() const;
};

GsvdFactors gsvd(const Matrix& h1, const Matrix& h2);

// Q1 on directions where sigma1 > sigma2 with alpha*P, Q2 on the rest with
// (1-alpha)*P; each water-filled over the generalized modes.
CovariancePair gsvd_precode(const ChannelPair& ch, double power, double alpha);

}  // namespace secprec
