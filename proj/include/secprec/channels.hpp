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

#include <cstdint>
#include <vector>

#include "secprec/matcore.hpp"

namespace secprec {

struct ChannelPair {
  Matrix h1;  // n1 x nt, user 1
  Matrix h2;  // n2 x nt, user 2

  std::size_t nt() const { return h1.cols(); }
  std::size_t n1() const { return h1.rows(); }
  std::size_t n2() const { return h2.rows(); }

  // Throws std::invalid_argument on shape or finiteness violations.
  void validate() const;
};

struct Dims {
  std::size_t nt = 2;
  std::size_t n1 = 1;
  std::size_t n2 = 1;

  friend bool operator==(const Dims&, const Dims&) = default;
};

// Entries i.i.d. N(0,1); identical seeds give bit-identical pairs.
ChannelPair sample_channel_pair(std::size_t nt, std::size_t n1, std::size_t n2,
                                std::uint64_t seed);
inline ChannelPair sample_channel_pair(const Dims& d, std::uint64_t seed) {
  return sample_channel_pair(d.nt, d.n1, d.n2, seed);
}

// `count` pairs, the i-th drawn from derive_seed(seed, i).
std::vector<ChannelPair> sample_channel_set(const Dims& d, std::size_t count, std::uint64_t seed);

}  // namespace secprec
