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

#include "secprec/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "secprec/features.hpp"
#include "secprec/hashing.hpp"
#include "secprec/kernels.hpp"
#include "secprec/random.hpp"

namespace secprec {

PrecoderModel::PrecoderModel(std::vector<std::size_t> widths, ModelContext context)
    : widths_(std::move(widths)), context_(context) {
  if (widths_.size() < 2) throw std::invalid_argument("PrecoderModel: need at least two layer widths");
  for (std::size_t w : widths_) {
    if (w == 0) throw std::invalid_argument("PrecoderModel: zero layer width");
  }
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    offsets_.push_back(total);
    total += widths_[l] * widths_[l + 1] + widths_[l + 1];
  }
  params_.assign(total, 0.0);
}

std::vector<std::size_t> PrecoderModel::default_widths(std::size_t nt) {
  std::vector<std::size_t> w{feature_length(nt)};
  w.insert(w.end(), 9, 256);
  w.push_back(128);
  w.push_back(64);
  w.push_back(label_length(nt));
  return w;
}

PrecoderModel PrecoderModel::initialized(std::vector<std::size_t> widths, ModelContext context,
                                         std::uint64_t seed) {
  PrecoderModel m(std::move(widths), context);
  Rng rng(seed);
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    const double scale = std::sqrt(2.0 / static_cast<double>(m.widths_[l]));
    for (double& w : m.weights(l)) w = scale * rng.normal();
  }
  return m;
}

std::span<double> PrecoderModel::weights(std::size_t l) {
  return std::span<double>(params_).subspan(offsets_[l], widths_[l] * widths_[l + 1]);
}
std::span<const double> PrecoderModel::weights(std::size_t l) const {
  return std::span<const double>(params_).subspan(offsets_[l], widths_[l] * widths_[l + 1]);
}
std::span<double> PrecoderModel::biases(std::size_t l) {
  return std::span<double>(params_).subspan(offsets_[l] + widths_[l] * widths_[l + 1], widths_[l + 1]);
}
std::span<const double> PrecoderModel::biases(std::size_t l) const {
  return std::span<const double>(params_).subspan(offsets_[l] + widths_[l] * widths_[l + 1],
                                                  widths_[l + 1]);
}

std::vector<double> PrecoderModel::forward(std::span<const double> input) const {
  if (widths_.empty() || input.size() != input_dim()) {
    throw std::invalid_argument("mlp_forward: input length " + std::to_string(input.size()) +
                                " does not match model input " +
                                std::to_string(widths_.empty() ? 0 : input_dim()));
  }
  const std::size_t widest = *std::max_element(widths_.begin(), widths_.end());
  std::vector<double> a(input.begin(), input.end());
  a.resize(widest);
  std::vector<double> b(widest);
  const std::size_t layers = layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = widths_[l];
    const std::size_t out = widths_[l + 1];
    kernels::gemv(out, in, weights(l).data(), a.data(), biases(l).data(), b.data());
    if (l + 1 < layers) kernels::bias_act(1, out, nullptr, b.data(), out, true);
    std::swap(a, b);
  }
  a.resize(output_dim());
  return a;
}

namespace {

// Activations and scratch for one mini-batch pass.
class BatchWorkspace {
 public:
  void prepare(const PrecoderModel& m, std::size_t batch) {
    const auto& w = m.widths();
    if (batch_ != batch || widths_ != w) {
      batch_ = batch;
      widths_ = w;
      acts_.assign(w.size(), {});
      for (std::size_t l = 0; l < w.size(); ++l) acts_[l].assign(batch * w[l], 0.0);
      const std::size_t widest = *std::max_element(w.begin(), w.end());
      delta_.assign(batch * widest, 0.0);
      delta_prev_.assign(batch * widest, 0.0);
      delta_t_.assign(batch * widest, 0.0);
      wt_.assign(widest * widest, 0.0);
    }
  }

  // acts[0] must already hold the inputs.
  void forward(const PrecoderModel& m) {
    const std::size_t layers = m.layer_count();
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t in = widths_[l];
      const std::size_t out = widths_[l + 1];
      kernels::transpose(out, in, m.weights(l).data(), in, wt_.data(), out);
      kernels::gemm_nn(batch_, out, in, acts_[l].data(), in, wt_.data(), out, acts_[l + 1].data(),
                       out, false);
      kernels::bias_act(batch_, out, m.biases(l).data(), acts_[l + 1].data(), out, l + 1 < layers);
    }
  }

  double backward(const PrecoderModel& m, std::span<const double> targets, std::span<double> grad) {
    const std::size_t layers = m.layer_count();
    const std::size_t out_dim = widths_.back();
    const std::vector<double>& y = acts_.back();
    const double scale = 2.0 / static_cast<double>(batch_ * out_dim);
    double loss = 0.0;
    for (std::size_t i = 0; i < batch_ * out_dim; ++i) {
      const double d = y[i] - targets[i];
      loss += d * d;
      delta_[i] = scale * d;
    }
    loss /= static_cast<double>(batch_ * out_dim);

    std::size_t offset = grad.size();
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = widths_[l];
      const std::size_t out = widths_[l + 1];
      offset -= in * out + out;
      double* gw = grad.data() + offset;
      double* gb = gw + in * out;
      kernels::transpose(batch_, out, delta_.data(), out, delta_t_.data(), batch_);
      kernels::gemm_nn(out, in, batch_, delta_t_.data(), batch_, acts_[l].data(), in, gw, in, false);
      kernels::col_sum(batch_, out, delta_.data(), out, gb, false);
      if (l > 0) {
        kernels::gemm_nn(batch_, in, out, delta_.data(), out, m.weights(l).data(), in,
                         delta_prev_.data(), in, false);
        kernels::relu_mask(batch_ * in, acts_[l].data(), delta_prev_.data());
        std::swap(delta_, delta_prev_);
      }
    }
    return loss;
  }

  std::span<double> input() { return acts_.front(); }
  std::span<const double> output() const { return acts_.back(); }

 private:
  std::size_t batch_ = 0;
  std::vector<std::size_t> widths_;
  std::vector<std::vector<double>> acts_;
  std::vector<double> delta_, delta_prev_, delta_t_, wt_;
};

void require_layout(const PrecoderModel& m, std::span<const double> inputs,
                    std::span<const double> targets, std::size_t batch, std::size_t grad_size) {
  if (batch == 0) throw std::invalid_argument("loss_and_gradient: empty batch");
  if (inputs.size() != batch * m.input_dim() || targets.size() != batch * m.output_dim()) {
    throw std::invalid_argument("loss_and_gradient: batch blocks do not match model dimensions");
  }
  if (grad_size != m.params().size()) {
    throw std::invalid_argument("loss_and_gradient: gradient span has wrong length");
  }
}

}  // namespace

double loss_and_gradient(const PrecoderModel& m, std::span<const double> inputs,
                         std::span<const double> targets, std::size_t batch,
                         std::span<double> grad) {
  require_layout(m, inputs, targets, batch, grad.size());
  BatchWorkspace ws;
  ws.prepare(m, batch);
  std::copy(inputs.begin(), inputs.end(), ws.input().begin());
  ws.forward(m);
  return ws.backward(m, targets, grad);
}

void forward_batch(const PrecoderModel& m, std::span<const double> inputs, std::size_t batch,
                   std::span<double> outputs) {
  if (inputs.size() != batch * m.input_dim() || outputs.size() != batch * m.output_dim()) {
    throw std::invalid_argument("forward_batch: blocks do not match model dimensions");
  }
  constexpr std::size_t chunk = 256;
  BatchWorkspace ws;
  for (std::size_t start = 0; start < batch; start += chunk) {
    const std::size_t b = std::min(chunk, batch - start);
    ws.prepare(m, b);
    std::copy_n(inputs.begin() + start * m.input_dim(), b * m.input_dim(), ws.input().begin());
    ws.forward(m);
    std::copy_n(ws.output().begin(), b * m.output_dim(), outputs.begin() + start * m.output_dim());
  }
}

double dataset_mse(const PrecoderModel& m, const Dataset& ds) {
  if (ds.size() == 0) throw std::invalid_argument("dataset_mse: empty dataset");
  if (ds.header().feature_dim() != m.input_dim() || ds.header().label_dim() != m.output_dim()) {
    throw std::invalid_argument("dataset_mse: dataset dimensions do not match the model");
  }
  std::vector<double> pred(ds.size() * m.output_dim());
  forward_batch(m, ds.feature_block(), ds.size(), pred);
  const auto labels = ds.label_block();
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - labels[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

double TrainConfig::learning_rate_at(int epoch) const {
  return learning_rate * std::pow(drop_factor, epoch / drop_period);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !(drop_factor > 0.0) || drop_period <= 0 || batch_size == 0 ||
      validation_frequency == 0 || validation_patience <= 0 || max_epochs <= 0) {
    throw std::invalid_argument("TrainConfig: all schedule parameters must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw std::invalid_argument("TrainConfig: invalid Adam coefficients");
  }
}

TrainResult train(const TrainConfig& cfg, const Dataset& train_set, const Dataset& val_set,
                  const CheckpointFn& on_improve) {
  cfg.validate();
  if (train_set.size() == 0 || val_set.size() == 0) throw std::invalid_argument("train: empty dataset");
  const DatasetHeader& th = train_set.header();
  const DatasetHeader& vh = val_set.header();
  if (th.dims != vh.dims || th.alpha != vh.alpha || th.power != vh.power) {
    throw std::invalid_argument("train: training and validation sets have different contexts");
  }

  const ModelContext ctx{th.dims, th.alpha, th.power, kFeatureVersion};
  std::vector<std::size_t> widths = cfg.widths.empty() ? PrecoderModel::default_widths(th.dims.nt)
                                                       : cfg.widths;
  if (widths.front() != th.feature_dim() || widths.back() != th.label_dim()) {
    throw std::invalid_argument("train: layer widths do not match dataset dimensions");
  }

  Rng rng(cfg.seed);
  PrecoderModel model = PrecoderModel::initialized(widths, ctx, rng());
  PrecoderModel best = model;

  const std::size_t n_params = model.params().size();
  std::vector<double> grad(n_params), adam_m(n_params, 0.0), adam_v(n_params, 0.0);

  const std::size_t n = train_set.size();
  const std::size_t fdim = th.feature_dim();
  const std::size_t ldim = th.label_dim();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> targets(cfg.batch_size * ldim);
  BatchWorkspace ws;

  TrainResult result;
  TrainLog& log = result.log;
  log.best_val_mse = std::numeric_limits<double>::infinity();
  int stale = 0;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  std::size_t last_validated = 0;
  bool stop = false;
  double b1t = 1.0, b2t = 1.0;

  auto validate_now = [&](int epoch, double lr) {
    ValidationRecord rec;
    rec.iteration = log.iterations;
    rec.epoch = epoch;
    rec.learning_rate = lr;
    rec.train_mse = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    rec.val_mse = dataset_mse(model, val_set);
    rec.improved = rec.val_mse < log.best_val_mse;
    loss_sum = 0.0;
    loss_count = 0;
    last_validated = log.iterations;
    if (rec.improved) {
      log.best_val_mse = rec.val_mse;
      log.best_iteration = rec.iteration;
      best = model;
      stale = 0;
      if (on_improve) on_improve(best, rec);
    } else if (++stale >= cfg.validation_patience) {
      stop = true;
      log.early_stopped = true;
    }
    log.records.push_back(rec);
  };

  int epoch = 0;
  for (; epoch < cfg.max_epochs && !stop; ++epoch) {
    const double lr = cfg.learning_rate_at(epoch);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    for (std::size_t start = 0; start < n && !stop; start += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, n - start);
      ws.prepare(model, b);
      auto in = ws.input();
      for (std::size_t r = 0; r < b; ++r) {
        const auto f = train_set.features(order[start + r]);
        const auto t = train_set.labels(order[start + r]);
        std::copy(f.begin(), f.end(), in.begin() + r * fdim);
        std::copy(t.begin(), t.end(), targets.begin() + r * ldim);
      }
      ws.forward(model);
      const double loss = ws.backward(model, std::span<const double>(targets).first(b * ldim), grad);
      loss_sum += loss;
      ++loss_count;

      ++log.iterations;
      b1t *= cfg.beta1;
      b2t *= cfg.beta2;
      const kernels::AdamCoeffs coeffs{lr, cfg.beta1, cfg.beta2, cfg.epsilon, 1.0 / (1.0 - b1t),
                                       1.0 / (1.0 - b2t)};
      kernels::adam_step(n_params, model.params().data(), grad.data(), adam_m.data(), adam_v.data(),
                         coeffs);

      if (log.iterations % cfg.validation_frequency == 0) validate_now(epoch, lr);
    }
  }
  log.epochs_run = epoch;
  if (!stop && last_validated != log.iterations) {
    validate_now(std::max(0, epoch - 1), cfg.learning_rate_at(std::max(0, epoch - 1)));
  }
  result.model = std::move(best);
  return result;
}

CovariancePair predict_covariances(const PrecoderModel& m, const ChannelPair& ch) {
  ch.validate();
  const ModelContext& ctx = m.context();
  if (ch.nt() != ctx.dims.nt) {
    throw std::invalid_argument("predict_covariances: channel has nt=" + std::to_string(ch.nt()) +
                                " but the model was trained for nt=" + std::to_string(ctx.dims.nt));
  }
  if (ctx.feature_version != kFeatureVersion) {
    throw std::invalid_argument("predict_covariances: unsupported feature version");
  }
  const std::vector<double> y = m.forward(build_input(ch));
  for (double v : y) {
    if (!std::isfinite(v)) throw std::domain_error("predict_covariances: non-finite network output");
  }
  return unpack_labels(y, ctx.dims.nt, ctx.power);
}

namespace {

std::string param_bytes(const PrecoderModel& m) {
  std::string bytes;
  bytes.reserve(m.params().size() * 8);
  for (double v : m.params()) append_f64_le(bytes, v);
  return bytes;
}

}  // namespace

void save_model(const std::filesystem::path& path, const PrecoderModel& m) {
  const std::string body = param_bytes(m);
  nlohmann::ordered_json h;
  h["format"] = "secprec-model";
  h["version"] = kModelVersion;
  h["widths"] = m.widths();
  h["activation"] = "relu";
  h["context"] = {{"n_t", m.context().dims.nt},   {"n1", m.context().dims.n1},
                  {"n2", m.context().dims.n2},    {"alpha", m.context().alpha},
                  {"P", m.context().power},       {"feature_version", m.context().feature_version}};
  h["param_count"] = m.params().size();
  h["checksum"] = hex64(fnv1a64(body));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open model for writing: " + path.string());
  const std::string head = h.dump() + "\n";
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw std::runtime_error("failed writing model: " + path.string());
}

PrecoderModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("model file has no header: " + path.string());

  std::vector<std::size_t> widths;
  ModelContext ctx;
  std::size_t count = 0;
  std::string checksum;
  try {
    const auto h = nlohmann::json::parse(line);
    if (h.at("format").get<std::string>() != "secprec-model") throw std::runtime_error("not a secprec model");
    const int version = h.at("version").get<int>();
    if (version != kModelVersion) {
      throw std::runtime_error("unsupported model version " + std::to_string(version));
    }
    widths = h.at("widths").get<std::vector<std::size_t>>();
    const auto& c = h.at("context");
    ctx.dims = {c.at("n_t").get<std::size_t>(), c.at("n1").get<std::size_t>(), c.at("n2").get<std::size_t>()};
    ctx.alpha = c.at("alpha").get<double>();
    ctx.power = c.at("P").get<double>();
    ctx.feature_version = c.at("feature_version").get<int>();
    count = h.at("param_count").get<std::size_t>();
    checksum = h.at("checksum").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed model header in " + path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string(e.what()) + " (" + path.string() + ")");
  }

  if (widths.size() < 2 || widths.front() != feature_length(ctx.dims.nt) ||
      widths.back() != label_length(ctx.dims.nt)) {
    throw std::runtime_error("model widths are inconsistent with its context: " + path.string());
  }
  PrecoderModel m(widths, ctx);
  if (m.params().size() != count) {
    throw std::runtime_error("model parameter count does not match its widths: " + path.string());
  }

  std::string body(count * 8, '\0');
  in.read(body.data(), static_cast<std::streamsize>(body.size()));
  if (static_cast<std::size_t>(in.gcount()) != body.size()) {
    throw std::runtime_error("model file truncated: " + path.string());
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("model file has trailing bytes: " + path.string());
  }
  if (hex64(fnv1a64(body)) != checksum) {
    throw std::runtime_error("model checksum mismatch (corrupted file): " + path.string());
  }
  auto params = m.params();
  const auto* p = reinterpret_cast<const unsigned char*>(body.data());
  for (std::size_t i = 0; i < count; ++i) {
    params[i] = read_f64_le(p + 8 * i);
    if (!std::isfinite(params[i])) throw std::runtime_error("model has non-finite parameters: " + path.string());
  }
  return m;
}

}  // namespace secprec
