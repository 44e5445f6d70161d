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

// Fully connected ReLU regression network mapping channel features to packed
// covariance labels, trained with Adam on mean squared error.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "secprec/channels.hpp"
#include "secprec/dataset.hpp"
#include "secprec/secrecy_rates.hpp"

namespace secprec {

inline constexpr int kModelVersion = 1;

struct ModelContext {
  Dims dims;
  double alpha = 0.0;
  double power = 0.0;
  int feature_version = 1;

  friend bool operator==(const ModelContext&, const ModelContext&) = default;
};

class PrecoderModel {
 public:
  PrecoderModel() = default;
  // All parameters zero.
  PrecoderModel(std::vector<std::size_t> widths, ModelContext context);

  // [6nt^2, 256 x 9, 128, 64, nt(nt+1)]
  static std::vector<std::size_t> default_widths(std::size_t nt);
  // He-normal weights (std sqrt(2 / fan_in)), zero biases.
  static PrecoderModel initialized(std::vector<std::size_t> widths, ModelContext context,
                                   std::uint64_t seed);

  const std::vector<std::size_t>& widths() const { return widths_; }
  std::size_t layer_count() const { return widths_.empty() ? 0 : widths_.size() - 1; }
  std::size_t input_dim() const { return widths_.front(); }
  std::size_t output_dim() const { return widths_.back(); }
  const ModelContext& context() const { return context_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  // Row-major fan_out x fan_in.
  std::span<double> weights(std::size_t layer);
  std::span<const double> weights(std::size_t layer) const;
  std::span<double> biases(std::size_t layer);
  std::span<const double> biases(std::size_t layer) const;

  // Throws std::invalid_argument if input length does not match.
  std::vector<double> forward(std::span<const double> input) const;

  friend bool operator==(const PrecoderModel&, const PrecoderModel&) = default;

 private:
  std::vector<std::size_t> widths_;
  std::vector<std::size_t> offsets_;  // start of layer l's weights in params_
  ModelContext context_;
  std::vector<double> params_;
};

inline std::vector<double> mlp_forward(const PrecoderModel& m, std::span<const double> v) {
  return m.forward(v);
}

// Mean over batch and outputs of (y - t)^2, and its gradient with respect to
// every parameter (same layout as params()). Inputs/targets are row-major
// batch x dim blocks.
double loss_and_gradient(const PrecoderModel& m, std::span<const double> inputs,
                         std::span<const double> targets, std::size_t batch,
                         std::span<double> grad);

// Batched forward: outputs is batch x output_dim.
void forward_batch(const PrecoderModel& m, std::span<const double> inputs, std::size_t batch,
                   std::span<double> outputs);

// Mean squared error of predictions against stored labels.
double dataset_mse(const PrecoderModel& m, const Dataset& ds);

struct TrainConfig {
  double learning_rate = 1e-3;
  double drop_factor = 0.5;
  int drop_period = 5;  // epochs
  std::size_t batch_size = 256;
  std::size_t validation_frequency = 1000;  // iterations
  int validation_patience = 5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_epochs = 30;
  std::uint64_t seed = 0;
  std::vector<std::size_t> widths;  // empty: default_widths(nt)

  double learning_rate_at(int epoch) const;
  void validate() const;
};

struct ValidationRecord {
  std::size_t iteration = 0;
  int epoch = 0;
  double learning_rate = 0.0;
  double train_mse = 0.0;  // mean mini-batch loss since the previous record
  double val_mse = 0.0;
  bool improved = false;
};

struct TrainLog {
  std::vector<ValidationRecord> records;
  double best_val_mse = 0.0;
  std::size_t best_iteration = 0;
  std::size_t iterations = 0;
  int epochs_run = 0;
  bool early_stopped = false;
};

struct TrainResult {
  PrecoderModel model;  // best-validation parameters
  TrainLog log;
};

// Called with the new best model each time validation improves.
using CheckpointFn = std::function<void(const PrecoderModel&, const ValidationRecord&)>;

TrainResult train(const TrainConfig& cfg, const Dataset& train_set, const Dataset& val_set,
                  const CheckpointFn& on_improve = {});

// Features -> forward -> unpack_labels with the model's power budget.
CovariancePair predict_covariances(const PrecoderModel& m, const ChannelPair& ch);

void save_model(const std::filesystem::path& path, const PrecoderModel& m);
PrecoderModel load_model(const std::filesystem::path& path);

}  // namespace secprec
