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

// Power-splitting decomposition of the two-user secure downlink into two
// wiretap problems: user 1 against user 2 with alpha*P, then user 2 against
// user 1 on channels whitened by user 1's covariance with (1-alpha)*P.

#include <string>
#include <vector>

#include "secprec/channels.hpp"
#include "secprec/secrecy_rates.hpp"
#include "secprec/wiretap.hpp"

namespace secprec {

struct SplitConfig {
  double alpha = 0.5;
  double power = 10.0;
  SolverOptions solver{};

  void validate() const;
};

struct SplitResult {
  CovariancePair q;
  RatePair rates;  // recomputed on the original channels
  double stage2_objective = 0.0;  // whitened objective the second solve maximized
};

SplitResult split_solve(const ChannelPair& ch, const SplitConfig& cfg);

struct SweepPoint {
  double alpha;
  RatePair rates;
  CovariancePair q;
};

std::vector<SweepPoint> sweep_alpha(const ChannelPair& ch, double power,
                                    const std::vector<double>& alphas,
                                    const SolverOptions& solver = {});

// Parses "start:step:end" (inclusive end, tolerant to rounding) or a single value.
std::vector<double> parse_alpha_grid(const std::string& spec);

}  // namespace secprec
