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

// Network input features and covariance label packing.

#include <cstddef>
#include <span>
#include <vector>

#include "secprec/channels.hpp"
#include "secprec/secrecy_rates.hpp"

namespace secprec {

inline constexpr double kFeatureScaleLinear = 0.05;
inline constexpr double kFeatureScaleQuadratic = 0.002;
inline constexpr int kFeatureVersion = 1;

constexpr std::size_t feature_length(std::size_t nt) { return 6 * nt * nt; }
constexpr std::size_t label_length(std::size_t nt) { return nt * (nt + 1); }

// v = [0.05 vec(G), 0.002 vec(G^T G)] with G = [H1^T H1, H2^T H2] (nt x 2nt),
// vec() column-major.
std::vector<double> build_input(const ChannelPair& ch);
void build_input(const ChannelPair& ch, std::span<double> out);

// Upper triangles of Q1 then Q2, row-major.
std::vector<double> pack_labels(const CovariancePair& q);

// Mirrors the triangles, clips negative eigenvalues of each matrix, then scales
// both by a common factor if tr(Q1) + tr(Q2) exceeds `power`.
CovariancePair unpack_labels(std::span<const double> labels, std::size_t nt, double power);

}  // namespace secprec
