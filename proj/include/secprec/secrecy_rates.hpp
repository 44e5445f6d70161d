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

// Secrecy rate region of the two-user broadcast channel with confidential
// messages, in bits per real channel use.

#include "secprec/channels.hpp"
#include "secprec/matcore.hpp"

namespace secprec {

struct CovariancePair {
  SymMatrix q1;
  SymMatrix q2;
  double power = 0.0;  // shared trace budget

  // PSD within 1e-9 and tr(q1) + tr(q2) <= power * (1 + 1e-9).
  bool feasible(double tol = 1e-9) const;
  // Throws std::invalid_argument describing the first violated invariant.
  void validate(double tol = 1e-9) const;
};

struct RatePair {
  double r1 = 0.0;
  double r2 = 0.0;

  double sum() const { return r1 + r2; }
};

// 1/2 log2|I + Hm Q Hm^T| - 1/2 log2|I + He Q He^T|, unclamped.
double wiretap_objective(const Matrix& legit, const Matrix& eaves, const SymMatrix& q);

double rate_user1(const SymMatrix& q1, const ChannelPair& ch);
double rate_user2(const CovariancePair& q, const ChannelPair& ch);
RatePair secrecy_rates(const CovariancePair& q, const ChannelPair& ch);

// H' = Lambda^{-1/2} V^T H with V Lambda V^T = I + H Q1 H^T.
Matrix whiten(const Matrix& h, const SymMatrix& q1);

}  // namespace secprec
