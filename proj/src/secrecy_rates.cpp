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

#include "secprec/secrecy_rates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace secprec {
namespace {

void require_psd(const SymMatrix& q, const char* what) {
  if (!q.all_finite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite covariance");
  }
  const double lmin = min_eigenvalue(q);
  if (lmin < -1e-9) {
    std::ostringstream msg;
    msg << what << ": covariance is not PSD (min eigenvalue " << lmin << ")";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

bool CovariancePair::feasible(double tol) const {
  try {
    validate(tol);
  } catch (const std::invalid_argument&) {
    return false;
  }
  return true;
}

void CovariancePair::validate(double tol) const {
  if (q1.dim() != q2.dim()) throw std::invalid_argument("CovariancePair: dimension mismatch");
  if (!(power >= 0.0)) throw std::invalid_argument("CovariancePair: negative power budget");
  for (const SymMatrix* q : {&q1, &q2}) {
    if (!q->all_finite()) throw std::invalid_argument("CovariancePair: non-finite entries");
    const double lmin = min_eigenvalue(*q);
    if (lmin < -tol) {
      std::ostringstream msg;
      msg << "CovariancePair: min eigenvalue " << lmin << " below -" << tol;
      throw std::invalid_argument(msg.str());
    }
  }
  const double tr = q1.trace() + q2.trace();
  if (tr > power * (1.0 + tol)) {
    std::ostringstream msg;
    msg << "CovariancePair: trace sum " << tr << " exceeds budget " << power;
    throw std::invalid_argument(msg.str());
  }
}

double wiretap_objective(const Matrix& legit, const Matrix& eaves, const SymMatrix& q) {
  return 0.5 * (logdet_pd(shifted_congruence(legit, q)) - logdet_pd(shifted_congruence(eaves, q)));
}

double rate_user1(const SymMatrix& q1, const ChannelPair& ch) {
  require_psd(q1, "rate_user1");
  return std::max(0.0, wiretap_objective(ch.h1, ch.h2, q1));
}

double rate_user2(const CovariancePair& q, const ChannelPair& ch) {
  require_psd(q.q1, "rate_user2");
  require_psd(q.q2, "rate_user2");
  const SymMatrix total = q.q1 + q.q2;
  const double own = logdet_pd(shifted_congruence(ch.h2, total)) -
                     logdet_pd(shifted_congruence(ch.h2, q.q1));
  const double leak = logdet_pd(shifted_congruence(ch.h1, total)) -
                      logdet_pd(shifted_congruence(ch.h1, q.q1));
  return std::max(0.0, 0.5 * (own - leak));
}

RatePair secrecy_rates(const CovariancePair& q, const ChannelPair& ch) {
  return {rate_user1(q.q1, ch), rate_user2(q, ch)};
}

Matrix whiten(const Matrix& h, const SymMatrix& q1) {
  const EigPair e = sym_eig(shifted_congruence(h, q1));
  Matrix out(h.rows(), h.cols());
  for (std::size_t k = 0; k < h.rows(); ++k) {
    const double s = 1.0 / std::sqrt(e.values[k]);
    for (std::size_t c = 0; c < h.cols(); ++c) {
      double acc = 0.0;
      for (std::size_t r = 0; r < h.rows(); ++r) acc += e.vectors(r, k) * h(r, c);
      out(k, c) = s * acc;
    }
  }
  return out;
}

}  // namespace secprec
