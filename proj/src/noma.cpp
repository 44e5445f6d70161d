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

#include "secprec/noma.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace secprec {

void SplitConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("SplitConfig: alpha must be in [0, 1]");
  if (!(power >= 0.0) || !std::isfinite(power)) {
    throw std::invalid_argument("SplitConfig: power must be finite and nonnegative");
  }
}

SplitResult split_solve(const ChannelPair& ch, const SplitConfig& cfg) {
  cfg.validate();
  ch.validate();

  const WiretapProblem first{ch.h1, ch.h2, cfg.alpha * cfg.power};
  const SolverReport s1 = solve_wiretap_pga(first, cfg.solver);

  const WiretapProblem second{whiten(ch.h2, s1.q), whiten(ch.h1, s1.q),
                              (1.0 - cfg.alpha) * cfg.power};
  const SolverReport s2 = solve_wiretap_pga(second, cfg.solver);

  SplitResult out;
  out.q = CovariancePair{s1.q, s2.q, cfg.power};
  out.rates = secrecy_rates(out.q, ch);
  out.stage2_objective = s2.rate;
  return out;
}

std::vector<SweepPoint> sweep_alpha(const ChannelPair& ch, double power,
                                    const std::vector<double>& alphas,
                                    const SolverOptions& solver) {
  std::vector<SweepPoint> out;
  out.reserve(alphas.size());
  for (double a : alphas) {
    SplitResult r = split_solve(ch, SplitConfig{a, power, solver});
    out.push_back({a, r.rates, std::move(r.q)});
  }
  return out;
}

std::vector<double> parse_alpha_grid(const std::string& spec) {
  auto to_double = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad alpha grid '" + spec + "'");
    }
    if (used != s.size()) throw std::invalid_argument("bad alpha grid '" + spec + "'");
    return v;
  };

  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t pos; (pos = spec.find(':', start)) != std::string::npos; start = pos + 1) {
    parts.push_back(spec.substr(start, pos - start));
  }
  parts.push_back(spec.substr(start));

  std::vector<double> out;
  if (parts.size() == 1) {
    out.push_back(to_double(parts[0]));
  } else if (parts.size() == 3) {
    const double lo = to_double(parts[0]);
    const double step = to_double(parts[1]);
    const double hi = to_double(parts[2]);
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument("bad alpha grid '" + spec + "'");
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) {
      // Snap to 12 decimals so 0:0.1:1 yields 0.3 rather than 0.30000000000000004.
      const double v = std::round((lo + step * static_cast<double>(i)) * 1e12) / 1e12;
      out.push_back(v);
    }
  } else {
    throw std::invalid_argument("alpha grid must be 'start:step:end' or a single value");
  }
  for (double a : out) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("alpha values must lie in [0, 1]");
  }
  return out;
}

}  // namespace secprec
