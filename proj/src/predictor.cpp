// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dol/predictor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "dol/kernels.hpp"

namespace dol {
namespace {

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_dataset(std::span<const DatasetSample> dataset) {
  if (dataset.empty()) throw InvalidArgument("training dataset is empty");
  const std::size_t d = dataset.front().z.size();
  const Matrix& w0 = dataset.front().w;
  if (d == 0) throw InvalidArgument("context vectors are empty");
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].z.size() != d) {
      throw InvalidArgument("sample " + std::to_string(i) + " has context length " +
                            std::to_string(dataset[i].z.size()) + ", expected " +
                            std::to_string(d));
    }
    if (!dataset[i].w.same_shape(w0)) {
      throw InvalidArgument("sample " + std::to_string(i) + " has a mismatched weight shape");
    }
  }
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Shared scaffolding of both trainers: initialization, shuffling, batching
// and optimizer steps. `per_sample` returns the sample's loss and writes the
// upstream gradient d loss / d w_hat.
template <typename PerSample>
TrainResult run_training(std::span<const DatasetSample> dataset, const TrainConfig& config,
                         const std::string& metric, const Model* init_model,
                         PerSample per_sample) {
  config.validate();
  check_dataset(dataset);
  const auto start = Clock::now();

  TrainResult result;
  Model& model = result.model;
  if (init_model != nullptr) {
    const MlpParams& p = init_model->params;
    if (p.input_dim() != dataset.front().z.size() || p.out_rows() != dataset.front().w.rows() ||
        p.out_cols() != dataset.front().w.cols() ||
        init_model->standardizer.mean.size() != p.input_dim()) {
      throw InvalidArgument("initial model does not match the dataset shapes");
    }
    model = *init_model;
  } else {
    model.standardizer = Standardizer::fit(dataset);
    Rng init = make_stream(config.seed, 0, 0);
    model.params = MlpParams::random_init(dataset.front().z.size(), config.hidden,
                                          dataset.front().w.rows(), dataset.front().w.cols(),
                                          init);
  }
  Rng order_rng = make_stream(config.seed, 0, 1);
  OptimizerState state;

  result.history.metric = metric;
  result.history.seed = config.seed;

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::vector<double>> contexts;
  contexts.reserve(dataset.size());
  for (const auto& s : dataset) contexts.push_back(model.standardizer.apply(s.z));

  MlpParams batch_grad(model.params.input_dim(), model.params.hidden(),
                       model.params.out_rows(), model.params.out_cols());
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(order, order_rng);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      std::fill(batch_grad.flat().begin(), batch_grad.flat().end(), 0.0);
      for (std::size_t pos = begin; pos < end; ++pos) {
        const std::size_t idx = order[pos];
        MlpCache cache;
        const Matrix w_hat = mlp_forward(contexts[idx], model.params, &cache);
        Matrix upstream;
        loss_sum += per_sample(dataset[idx], w_hat, epoch, idx, upstream);
        const MlpParams g = mlp_backward(model.params, cache, upstream);
        kernels::axpy(1.0, g.flat(), batch_grad.flat());
      }
      const double scale = 1.0 / static_cast<double>(end - begin);
      for (double& v : batch_grad.flat()) v *= scale;
      optimizer_step(model.params.flat(), batch_grad.flat(), state, config.optimizer);
    }
    result.history.epochs.push_back(
        {epoch, loss_sum / static_cast<double>(dataset.size()), seconds_since(start)});
  }
  return result;
}

}  // namespace

MlpParams::MlpParams(std::size_t input_dim, std::size_t hidden, std::size_t out_rows,
                     std::size_t out_cols)
    : input_dim_(input_dim), hidden_(hidden), out_rows_(out_rows), out_cols_(out_cols) {
  if (input_dim == 0 || hidden == 0 || out_rows == 0 || out_cols == 0) {
    throw InvalidArgument("MLP dimensions must be positive");
  }
  data_.assign(off_b2() + output_dim(), 0.0);
}

MlpParams MlpParams::random_init(std::size_t input_dim, std::size_t hidden,
                                 std::size_t out_rows, std::size_t out_cols, Rng& rng) {
  MlpParams p(input_dim, hidden, out_rows, out_cols);
  const double a1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double a2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (double& v : p.w1()) v = uniform(rng, -a1, a1);
  for (double& v : p.b1()) v = uniform(rng, -a1, a1);
  for (double& v : p.w2()) v = uniform(rng, -a2, a2);
  for (double& v : p.b2()) v = uniform(rng, -a2, a2);
  return p;
}

Matrix mlp_forward(std::span<const double> z, const MlpParams& params, MlpCache* cache) {
  if (z.size() != params.input_dim()) {
    throw InvalidArgument("context length " + std::to_string(z.size()) +
                          " does not match MLP input " + std::to_string(params.input_dim()));
  }
  const auto& k = kernels::active();
  const std::size_t h = params.hidden();
  const std::size_t o = params.output_dim();
  std::vector<double> pre(h), hid(h), raw(o);
  k.gemv(params.w1().data(), z.data(), params.b1().data(), pre.data(), h, z.size());
  for (std::size_t i = 0; i < h; ++i) hid[i] = pre[i] > 0.0 ? pre[i] : 0.0;
  k.gemv(params.w2().data(), hid.data(), params.b2().data(), raw.data(), o, h);

  Matrix out(params.out_rows(), params.out_cols());
  for (std::size_t i = 0; i < o; ++i) out.flat()[i] = softplus(raw[i]);
  if (!out.all_finite()) throw RuntimeError("MLP produced a non-finite output");
  if (cache != nullptr) {
    cache->z.assign(z.begin(), z.end());
    cache->pre_hidden = std::move(pre);
    cache->hidden = std::move(hid);
    cache->raw = std::move(raw);
  }
  return out;
}

MlpParams mlp_backward(const MlpParams& params, const MlpCache& cache, const Matrix& upstream) {
  const std::size_t d = params.input_dim();
  const std::size_t h = params.hidden();
  const std::size_t o = params.output_dim();
  if (cache.z.size() != d || cache.pre_hidden.size() != h || cache.hidden.size() != h ||
      cache.raw.size() != o) {
    throw InvalidArgument("MLP cache does not match the parameters");
  }
  if (upstream.rows() != params.out_rows() || upstream.cols() != params.out_cols()) {
    throw InvalidArgument("upstream gradient shape does not match the MLP output");
  }
  const auto& k = kernels::active();
  MlpParams grad(d, h, params.out_rows(), params.out_cols());

  std::vector<double> d_raw(o);
  for (std::size_t i = 0; i < o; ++i) d_raw[i] = upstream.flat()[i] * sigmoid(cache.raw[i]);
  std::copy(d_raw.begin(), d_raw.end(), grad.b2().begin());
  k.ger(1.0, d_raw.data(), cache.hidden.data(), grad.w2().data(), o, h);

  std::vector<double> d_hidden(h, 0.0);
  k.gemv_t_acc(params.w2().data(), d_raw.data(), d_hidden.data(), o, h);
  for (std::size_t i = 0; i < h; ++i) {
    if (cache.pre_hidden[i] <= 0.0) d_hidden[i] = 0.0;
  }
  std::copy(d_hidden.begin(), d_hidden.end(), grad.b1().begin());
  k.ger(1.0, d_hidden.data(), cache.z.data(), grad.w1().data(), h, d);
  return grad;
}

Standardizer Standardizer::identity(std::size_t dim) {
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

Standardizer Standardizer::fit(std::span<const DatasetSample> samples) {
  if (samples.empty()) throw InvalidArgument("cannot fit a standardizer on no samples");
  const std::size_t d = samples.front().z.size();
  Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  const double n = static_cast<double>(samples.size());
  for (const auto& x : samples) {
    for (std::size_t i = 0; i < d; ++i) s.mean[i] += x.z[i] / n;
  }
  for (const auto& x : samples) {
    for (std::size_t i = 0; i < d; ++i) {
      const double dev = x.z[i] - s.mean[i];
      s.scale[i] += dev * dev / n;
    }
  }
  for (double& v : s.scale) {
    v = std::sqrt(v);
    if (!(v > 1e-12)) v = 1.0;
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> z) const {
  if (z.size() != mean.size()) {
    throw InvalidArgument("context length " + std::to_string(z.size()) +
                          " does not match standardizer length " +
                          std::to_string(mean.size()));
  }
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = (z[i] - mean[i]) / scale[i];
  return out;
}

void optimizer_step(std::span<double> params, std::span<const double> grad,
                    OptimizerState& state, const OptimizerConfig& config) {
  if (params.size() != grad.size()) throw InvalidArgument("gradient size mismatch");
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw RuntimeError("non-finite gradient at parameter " + std::to_string(i));
    }
  }
  const double lr = config.learning_rate;
  if (config.kind == OptimizerConfig::Kind::kSgd) {
    kernels::axpy(-lr, grad, params);
    ++state.steps;
    return;
  }
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.steps = 0;
  }
  ++state.steps;
  const double t = static_cast<double>(state.steps);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grad[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
  }
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw InvalidArgument("batch size must be at least 1");
  if (!(optimizer.learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (hidden == 0) throw InvalidArgument("hidden width must be positive");
  if (sg_trials == 0) throw InvalidArgument("sg_trials must be at least 1");
  if (!(regularizer.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (optimizer.kind == OptimizerConfig::Kind::kAdam &&
      !(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0 && optimizer.beta2 >= 0.0 &&
        optimizer.beta2 < 1.0 && optimizer.adam_epsilon > 0.0)) {
    throw InvalidArgument("Adam hyperparameters out of range");
  }
}

std::vector<double> LossHistory::losses() const {
  std::vector<double> out;
  out.reserve(epochs.size());
  for (const auto& e : epochs) out.push_back(e.loss);
  return out;
}

void LossHistory::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path);
  out << "epoch," << metric << ",seconds\n";
  for (const auto& e : epochs) {
    out << e.epoch << ',' << format_number(e.loss) << ',' << format_number(e.seconds) << '\n';
  }
  if (!out) throw RuntimeError("write failed for " + path);
}

Matrix Model::predict(std::span<const double> z) const {
  return mlp_forward(standardizer.apply(z), params);
}

TrainResult train_dol(std::span<const DatasetSample> dataset, const Problem& problem,
                      const TrainConfig& config, const Model* init) {
  check_dataset(dataset);
  problem.f().check_weights(dataset.front().w);
  const EstimatorOptions options{config.sg_trials, config.baseline};
  return run_training(
      dataset, config, "decision_loss", init,
      [&](const DatasetSample& s, const Matrix& w_hat, std::size_t epoch, std::size_t idx,
          Matrix& upstream) {
        Rng stream = make_stream(config.seed, epoch, idx);
        const auto lg = decision_loss_and_gradient(s.w, w_hat, problem, config.regularizer,
                                                   options, stream());
        upstream = lg.gradient.grad;
        return lg.loss.loss;
      });
}

TrainResult train_two_stage(std::span<const DatasetSample> dataset, const TrainConfig& config) {
  return run_training(dataset, config, "mse", nullptr,
                      [](const DatasetSample& s, const Matrix& w_hat, std::size_t, std::size_t,
                         Matrix& upstream) {
                        const double k = static_cast<double>(w_hat.size());
                        upstream = w_hat - s.w;
                        const double mse = inner(upstream, upstream) / k;
                        upstream *= 2.0 / k;
                        return mse;
                      });
}

Selection select_routes(const Model& model, std::span<const double> z, const Problem& problem) {
  return run_deterministic_greedy(problem.f(), model.predict(z), problem.system);
}

void save_checkpoint(const std::string& path, const Model& model, const std::string& method,
                     const nlohmann::json& config_echo) {
  const MlpParams& p = model.params;
  nlohmann::json j;
  j["format"] = "dol-checkpoint";
  j["version"] = 1;
  j["method"] = method;
  j["shape"] = {{"input_dim", p.input_dim()},
                {"hidden", p.hidden()},
                {"out_rows", p.out_rows()},
                {"out_cols", p.out_cols()}};
  j["params"] = std::vector<double>(p.flat().begin(), p.flat().end());
  j["standardizer"] = {{"mean", model.standardizer.mean}, {"scale", model.standardizer.scale}};
  j["config"] = config_echo;
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw RuntimeError("write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open checkpoint " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    if (j.at("format").get<std::string>() != "dol-checkpoint") {
      throw RuntimeError(path + " is not a checkpoint");
    }
    const auto& shape = j.at("shape");
    Checkpoint c;
    c.method = j.at("method").get<std::string>();
    c.model.params = MlpParams(shape.at("input_dim").get<std::size_t>(),
                               shape.at("hidden").get<std::size_t>(),
                               shape.at("out_rows").get<std::size_t>(),
                               shape.at("out_cols").get<std::size_t>());
    const auto values = j.at("params").get<std::vector<double>>();
    if (values.size() != c.model.params.flat().size()) {
      throw RuntimeError(path + ": parameter count does not match the declared shape");
    }
    std::copy(values.begin(), values.end(), c.model.params.flat().begin());
    c.model.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
    c.model.standardizer.scale = j.at("standardizer").at("scale").get<std::vector<double>>();
    if (c.model.standardizer.mean.size() != c.model.params.input_dim() ||
        c.model.standardizer.scale.size() != c.model.params.input_dim()) {
      throw RuntimeError(path + ": normalization length does not match the input dimension");
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw RuntimeError(path + ": malformed checkpoint: " + e.what());
  }
}

}  // namespace dol
