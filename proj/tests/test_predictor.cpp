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

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "dol/fixture.hpp"
#include "dol/predictor.hpp"
#include "test_support.hpp"

using namespace dol;

namespace {

std::vector<double> random_context(Rng& rng, std::size_t d, double scale = 2.0) {
  std::vector<double> z(d);
  for (double& v : z) v = uniform(rng, -scale, scale);
  return z;
}

// Constant predictor that outputs exactly `w` (inverse softplus in the bias).
Model constant_model(const Matrix& w, std::size_t input_dim) {
  Model m;
  m.params = MlpParams(input_dim, 4, w.rows(), w.cols());
  for (std::size_t i = 0; i < w.size(); ++i) m.params.b2()[i] = std::log(std::expm1(w.flat()[i]));
  m.standardizer = Standardizer::identity(input_dim);
  return m;
}

std::vector<DatasetSample> linear_dataset(Rng& rng, std::size_t n) {
  std::vector<DatasetSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    DatasetSample s;
    s.z = random_context(rng, 3, 1.0);
    s.w = Matrix(2, 2);
    for (std::size_t k = 0; k < 4; ++k) {
      s.w.flat()[k] = 1.0 + 0.3 * s.z[k % 3] - 0.2 * s.z[(k + 1) % 3];
    }
    out.push_back(s);
  }
  return out;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dol_test_" + name)).string();
}

}  // namespace

TEST_CASE("mlp_forward") {
  MlpParams zero(5, 64, 9, 3);
  const Matrix out = mlp_forward(std::vector<double>(5, 1.0), zero);
  CHECK(out.rows() == 9);
  CHECK(out.cols() == 3);
  for (double v : out.flat()) CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  Rng rng(1);
  const MlpParams p = MlpParams::random_init(5, 16, 2, 3, rng);
  for (int t = 0; t < 50; ++t) {
    const Matrix w = mlp_forward(random_context(rng, 5, 100.0), p);
    for (double v : w.flat()) CHECK(v > 0.0);
  }
  CHECK_THROWS_AS(mlp_forward(std::vector<double>(4, 0.0), p), InvalidArgument);

  // Initialization range per layer.
  for (double v : p.w1()) CHECK(std::abs(v) <= 1.0 / std::sqrt(5.0));
  for (double v : p.w2()) CHECK(std::abs(v) <= 1.0 / std::sqrt(16.0));
}

TEST_CASE("mlp_backward") {
  Rng rng(2);
  const MlpParams p = MlpParams::random_init(6, 12, 3, 3, rng);
  const auto z = random_context(rng, 6);
  MlpCache cache;
  mlp_forward(z, p, &cache);

  const MlpParams zero_grad = mlp_backward(p, cache, Matrix(3, 3));
  for (double v : zero_grad.flat()) CHECK(v == 0.0);
  CHECK_THROWS_AS(mlp_backward(p, cache, Matrix(2, 3)), InvalidArgument);

  Matrix upstream(3, 3);
  for (double& v : upstream.flat()) v = uniform(rng, -1.0, 1.0);
  const MlpParams g = mlp_backward(p, cache, upstream);

  // Dead hidden units contribute nothing to their W1 row.
  for (std::size_t i = 0; i < p.hidden(); ++i) {
    if (cache.pre_hidden[i] > 0.0) continue;
    CHECK(g.b1()[i] == 0.0);
    for (std::size_t j = 0; j < p.input_dim(); ++j) CHECK(g.w1()[i * p.input_dim() + j] == 0.0);
  }

  // Central differences over 50 random coordinates.
  for (int probe = 0; probe < 50; ++probe) {
    const std::size_t k = uniform_index(rng, p.flat().size());
    MlpParams plus = p, minus = p;
    plus.flat()[k] += 1e-5;
    minus.flat()[k] -= 1e-5;
    const double fd = (inner(upstream, mlp_forward(z, plus)) -
                       inner(upstream, mlp_forward(z, minus))) /
                      2e-5;
    CHECK(std::abs(fd - g.flat()[k]) <= 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("optimizer_step") {
  const OptimizerConfig sgd{OptimizerConfig::Kind::kSgd, 0.1};
  std::vector<double> x{1.0};
  OptimizerState s;
  optimizer_step(x, std::vector<double>{0.0}, s, sgd);
  CHECK(x[0] == 1.0);
  optimizer_step(x, std::vector<double>{2.0}, s, sgd);
  CHECK(x[0] == doctest::Approx(0.8).epsilon(1e-15));

  // Bias correction makes the first Adam step about the learning rate.
  for (double scale : {1e-3, 1.0, 1e3}) {
    std::vector<double> y{0.0, 0.0};
    OptimizerState st;
    optimizer_step(y, std::vector<double>{scale, -scale}, st, OptimizerConfig{});
    CHECK(y[0] == doctest::Approx(-1e-3).epsilon(1e-4));
    CHECK(y[1] == doctest::Approx(1e-3).epsilon(1e-4));
  }

  std::vector<double> z{0.0};
  OptimizerState st;
  CHECK_THROWS_AS(optimizer_step(z, std::vector<double>{NAN}, st, sgd), RuntimeError);
  CHECK_THROWS_AS(optimizer_step(z, std::vector<double>{1.0, 2.0}, st, sgd), InvalidArgument);
}

TEST_CASE("standardizer") {
  Rng rng(3);
  std::vector<DatasetSample> data(20);
  for (auto& s : data) {
    s.z = {uniform(rng, 100.0, 900.0), 5.0, uniform(rng, -1.0, 1.0)};
    s.w = Matrix(1, 1);
  }
  const Standardizer st = Standardizer::fit(data);
  CHECK(st.scale[1] == 1.0);
  double m0 = 0.0, v0 = 0.0;
  for (const auto& s : data) {
    const auto t = st.apply(s.z);
    m0 += t[0] / 20.0;
    v0 += t[0] * t[0] / 20.0;
    CHECK(t[1] == 0.0);
  }
  CHECK(std::abs(m0) < 1e-12);
  CHECK(v0 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("train_dol") {
  // One candidate route: the decision is forced, the loss and gradient vanish
  // and plain SGD never moves the parameters.
  std::vector<DatasetSample> data;
  Rng rng(4);
  for (int i = 0; i < 5; ++i) data.push_back({random_context(rng, 3), Matrix(1, 1, 2.0), 0.0});
  const Problem forced{std::make_shared<AreaCoverageObjective>(AreaCoverageObjective::modular(1)),
                       IndependenceSystem::cardinality(1)};
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 2;
  cfg.optimizer.kind = OptimizerConfig::Kind::kSgd;
  cfg.optimizer.learning_rate = 0.5;
  cfg.seed = 11;
  const auto forced_run = train_dol(data, forced, cfg);
  TrainConfig untrained = cfg;
  untrained.epochs = 0;
  const auto init = train_dol(data, forced, untrained);
  for (double l : forced_run.history.losses()) CHECK(l == 0.0);
  CHECK(forced_run.model.params == init.model.params);

  // The fixture curve decreases and runs are reproducible.
  const auto fx = make_training_fixture();
  TrainConfig fc;
  fc.epochs = 12;
  fc.optimizer.learning_rate = 0.02;
  fc.regularizer.epsilon = 0.5;
  fc.seed = 2;
  const auto a = train_dol(fx.samples, fx.problem, fc);
  const auto b = train_dol(fx.samples, fx.problem, fc);
  CHECK(a.history.losses() == b.history.losses());
  CHECK(a.model.params == b.model.params);
  CHECK(a.history.epochs.size() == 12);
  CHECK(a.history.epochs.back().loss < a.history.epochs.front().loss);
  CHECK(a.history.metric == "decision_loss");

  CHECK_THROWS_AS(train_dol({}, fx.problem, fc), InvalidArgument);
  TrainConfig bad = fc;
  bad.batch_size = 0;
  CHECK_THROWS_AS(train_dol(fx.samples, fx.problem, bad), InvalidArgument);
}

TEST_CASE("train_two_stage") {
  Rng rng(5);
  // Constant target.
  std::vector<DatasetSample> constant;
  for (int i = 0; i < 40; ++i) {
    constant.push_back({random_context(rng, 3), Matrix::from_rows({{0.5, 2.0}, {1.0, 3.0}}), 0.0});
  }
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.batch_size = 10;
  cfg.optimizer.learning_rate = 1e-2;
  cfg.seed = 3;
  const auto run = train_two_stage(constant, cfg);
  CHECK(run.history.metric == "mse");
  CHECK(run.history.epochs.back().loss < 1e-2 * run.history.epochs.front().loss);

  // Full-batch SGD with a small step descends monotonically.
  const auto lin = linear_dataset(rng, 30);
  TrainConfig sgd;
  sgd.epochs = 60;
  sgd.batch_size = 30;
  sgd.optimizer.kind = OptimizerConfig::Kind::kSgd;
  sgd.optimizer.learning_rate = 1e-2;
  sgd.seed = 9;
  const auto mono = train_two_stage(lin, sgd);
  const auto l = mono.history.losses();
  for (std::size_t e = 1; e < l.size(); ++e) CHECK(l[e] <= l[e - 1] + 1e-6);

  CHECK(train_two_stage(lin, sgd).history.losses() == l);

  // Paired comparison: both trainers start from the same parameters.
  const auto fx = make_training_fixture();
  TrainConfig zero;
  zero.epochs = 0;
  zero.seed = 17;
  CHECK(train_two_stage(fx.samples, zero).model.params ==
        train_dol(fx.samples, fx.problem, zero).model.params);

  // A warm start continues from the given model, standardizer included.
  TrainConfig warm;
  warm.epochs = 3;
  warm.seed = 4;
  const auto mse = train_two_stage(fx.samples, warm);
  warm.epochs = 0;
  const auto same = train_dol(fx.samples, fx.problem, warm, &mse.model);
  CHECK(same.model.params == mse.model.params);
  CHECK(same.model.standardizer.mean == mse.model.standardizer.mean);
  warm.epochs = 2;
  const auto tuned = train_dol(fx.samples, fx.problem, warm, &mse.model);
  CHECK(tuned.model.params != mse.model.params);
  CHECK(tuned.history.epochs.size() == 2);

  Model wrong = mse.model;
  wrong.params = MlpParams(5, 4, 3, 3);
  CHECK_THROWS_AS(train_dol(fx.samples, fx.problem, warm, &wrong), InvalidArgument);
}

TEST_CASE("select_routes") {
  const Problem forced{std::make_shared<AreaCoverageObjective>(AreaCoverageObjective::modular(1)),
                       IndependenceSystem::cardinality(1)};
  CHECK(select_routes(constant_model(Matrix(1, 1, 1.0), 2), std::vector<double>{0, 0}, forced) ==
        Selection{0});

  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const auto inst = dol::testing::random_instance(rng, 6);
    const Problem p{dol::testing::make_objective(inst), IndependenceSystem::cardinality(3)};
    const Model perfect = constant_model(inst.w, 4);
    const auto z = random_context(rng, 4);
    CHECK(perfect.predict(z).flat().size() == inst.w.size());
    CHECK(select_routes(perfect, z, p) == run_deterministic_greedy(p.f(), inst.w, p.system));
  }
}

TEST_CASE("checkpoint and history files") {
  Rng rng(8);
  Model m;
  m.params = MlpParams::random_init(4, 8, 3, 2, rng);
  m.standardizer = {{1.0, 2.0, 3.0, 0.1}, {0.5, 1.0 / 3.0, 7.0, 1e-3}};
  const std::string path = temp_path("ckpt.json");
  save_checkpoint(path, m, "dol", nlohmann::json{{"epochs", 3}});
  const Checkpoint c = load_checkpoint(path);
  CHECK(c.method == "dol");
  CHECK(c.model.params == m.params);
  CHECK(c.model.standardizer.mean == m.standardizer.mean);
  CHECK(c.model.standardizer.scale == m.standardizer.scale);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint(path), RuntimeError);

  LossHistory h{"mse", 1, {{1, 0.1, 0.5}, {2, 1.0 / 3.0, 1.0}}};
  const std::string csv = temp_path("hist.csv");
  h.write_csv(csv);
  std::ifstream in(csv);
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  CHECK(header == "epoch,mse,seconds");
  CHECK(first == "1,0.10000000000000001,0.5");
  CHECK(std::stod(second.substr(2, second.find(',', 2) - 2)) == 1.0 / 3.0);
  std::filesystem::remove(csv);
}
