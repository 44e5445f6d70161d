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

#include "secprec/channels.hpp"

#include <stdexcept>

#include "secprec/random.hpp"

namespace secprec {

void ChannelPair::validate() const {
  if (h1.cols() == 0 || h1.rows() == 0 || h2.rows() == 0) {
    throw std::invalid_argument("ChannelPair: empty channel matrix");
  }
  if (h1.cols() != h2.cols()) {
    throw std::invalid_argument("ChannelPair: H1 and H2 have different column counts");
  }
  if (!h1.all_finite() || !h2.all_finite()) {
    throw std::invalid_argument("ChannelPair: non-finite entries");
  }
}

ChannelPair sample_channel_pair(std::size_t nt, std::size_t n1, std::size_t n2,
                                std::uint64_t seed) {
  if (nt == 0 || n1 == 0 || n2 == 0) {
    throw std::invalid_argument("sample_channel_pair: dimensions must be positive");
  }
  Rng rng(seed);
  ChannelPair ch{Matrix(n1, nt), Matrix(n2, nt)};
  for (double& v : ch.h1.data()) v = rng.normal();
  for (double& v : ch.h2.data()) v = rng.normal();
  return ch;
}

std::vector<ChannelPair> sample_channel_set(const Dims& d, std::size_t count, std::uint64_t seed) {
  std::vector<ChannelPair> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_channel_pair(d, derive_seed(seed, i)));
  return out;
}

}  // namespace secprec
