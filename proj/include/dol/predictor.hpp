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

// Context-to-weights predictor: a one-hidden-layer MLP with a softplus head,
// manual backpropagation, optimizers and the two training loops.

#ifndef DOL_PREDICTOR_HPP_
#define DOL_PREDICTOR_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dol/common.hpp"
#include "dol/gradient.hpp"
#include "json.hpp"

namespace dol {

// One training pair: context vector and fitted weight matrix.
struct DatasetSample {
  std::vector<double> z;
  Matrix w;
  double fit_residual = 0.0;
};

// Parameters of z -> softplus(W2 relu(W1 z + b1) + b2), stored in one flat
// buffer laid out as [W1 | b1 | W2 | b2] so optimizers can treat them as a
// single vector. The output is reshaped row-major to out_rows x out_cols.
class MlpParams {
 public:
  MlpParams() = default;
  MlpParams(std::size_t input_dim, std::size_t hidden, std::size_t out_rows,
            std::size_t out_cols);

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) per layer.
  static MlpParams random_init(std::size_t input_dim, std::size_t hidden, std::size_t out_rows,
                               std::size_t out_cols, Rng& rng);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t out_rows() const { return out_rows_; }
  std::size_t out_cols() const { return out_cols_; }
  std::size_t output_dim() const { return out_rows_ * out_cols_; }
  bool same_shape(const MlpParams& o) const {
    return input_dim_ == o.input_dim_ && hidden_ == o.hidden_ && out_rows_ == o.out_rows_ &&
           out_cols_ == o.out_cols_;
  }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  std::span<double> w1() { return {data_.data(), hidden_ * input_dim_}; }
  std::span<double> b1() { return {data_.data() + off_b1(), hidden_}; }
  std::span<double> w2() { return {data_.data() + off_w2(), output_dim() * hidden_}; }
  std::span<double> b2() { return {data_.data() + off_b2(), output_dim()}; }
  std::span<const double> w1() const { return {data_.data(), hidden_ * input_dim_}; }
  std::span<const double> b1() const { return {data_.data() + off_b1(), hidden_}; }
  std::span<const double> w2() const {
    return {data_.data() + off_w2(), output_dim() * hidden_};
  }
  std::span<const double> b2() const { return {data_.data() + off_b2(), output_dim()}; }

  friend bool operator==(const MlpParams&, const MlpParams&) = default;

 private:
  std::size_t off_b1() const { return hidden_ * input_dim_; }
  std::size_t off_w2() const { return off_b1() + hidden_; }
  std::size_t off_b2() const { return off_w2() + output_dim() * hidden_; }

  std::size_t input_dim_ = 0;
  std::size_t hidden_ = 0;
  std::size_t out_rows_ = 0;
  std::size_t out_cols_ = 0;
  std::vector<double> data_;
};

// Activations kept by the forward pass for the backward pass.
struct MlpCache {
  std::vector<double> z;
  std::vector<double> pre_hidden;  // W1 z + b1
  std::vector<double> hidden;      // relu(pre_hidden)
  std::vector<double> raw;         // W2 hidden + b2
};

Matrix mlp_forward(std::span<const double> z, const MlpParams& params, MlpCache* cache = nullptr);

// Gradient of <upstream, mlp_forward(z, params)> with respect to the parameters.
MlpParams mlp_backward(const MlpParams& params, const MlpCache& cache, const Matrix& upstream);

// Per-feature affine normalization z' = (z - mean) / scale.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  // Identity for a context of the given length.
  static Standardizer identity(std::size_t dim);
  // Fit on the given contexts; constant features get scale 1.
  static Standardizer fit(std::span<const DatasetSample> samples);
  std::vector<double> apply(std::span<const double> z) const;
};

struct OptimizerConfig {
  enum class Kind { kSgd, kAdam };
  Kind kind = Kind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t steps = 0;
};

// params <- params - update(grad). Throws RuntimeError on a non-finite gradient.
void optimizer_step(std::span<double> params, std::span<const double> grad,
                    OptimizerState& state, const OptimizerConfig& config);

struct TrainConfig {
  std::size_t batch_size = 40;
  std::size_t epochs = 30;
  std::size_t hidden = 64;
  OptimizerConfig optimizer;
  std::size_t sg_trials = 10;
  RegularizerConfig regularizer;
  std::optional<double> baseline;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;
  double seconds = 0.0;
};

// Per-epoch training metric: mean decision loss for DOL, mean squared error
// for the two-stage baseline.
struct LossHistory {
  std::string metric;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;

  std::vector<double> losses() const;
  // Columns: epoch,<metric>,seconds.
  void write_csv(const std::string& path) const;
};

// A trained predictor: parameters plus the normalization applied to contexts.
struct Model {
  MlpParams params;
  Standardizer standardizer;

  Matrix predict(std::span<const double> z) const;
};

struct TrainResult {
  Model model;
  LossHistory history;
};

// Both trainers fit the standardizer on the dataset and initialize the
// network from the same seed-derived stream, so a DOL run and a two-stage run
// with equal seeds start from identical parameters. Given `init`, DOL instead
// continues from that model, standardizer included.
TrainResult train_dol(std::span<const DatasetSample> dataset, const Problem& problem,
                      const TrainConfig& config, const Model* init = nullptr);
TrainResult train_two_stage(std::span<const DatasetSample> dataset, const TrainConfig& config);

// Deterministic greedy under the predicted weights.
Selection select_routes(const Model& model, std::span<const double> z, const Problem& problem);

// Checkpoint: shapes, flat parameters, normalization and an opaque config echo.
void save_checkpoint(const std::string& path, const Model& model, const std::string& method,
                     const nlohmann::json& config_echo);
struct Checkpoint {
  Model model;
  std::string method;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dol

#endif  // DOL_PREDICTOR_HPP_
