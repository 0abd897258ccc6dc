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
#include <limits>
#include <string>

#include "doctest.h"
#include "dol/demo.hpp"

using namespace dol;

namespace {

Matrix row(std::vector<double> v) {
  const std::size_t k = v.size();
  return Matrix(1, k, std::move(v));
}

}  // namespace

TEST_CASE("beta sweep crosses once at beta = 1/2.8") {
  const DemoCase demo = coverage_mix_case();
  const Selection s12{0, 1}, s13{0, 2};
  int sign_changes = 0;
  double prev = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double beta = i / 1000.0;
    const Matrix w = row({beta, 1.0 - beta});
    const double d = demo.problem.f().value(s13, w) - demo.problem.f().value(s12, w);
    // Hand-computed from the cell areas: 1.8 beta - (1 - beta).
    CHECK(d == doctest::Approx(2.8 * beta - 1.0).epsilon(1e-12));
    if (i > 0 && (d >= 0.0) != (prev >= 0.0)) ++sign_changes;
    prev = d;
  }
  CHECK(sign_changes == 1);
  CHECK(demo_decision(demo, row({0.3, 0.7})) == s12);
  CHECK(demo_decision(demo, row({0.4, 0.6})) == s13);
}

TEST_CASE("route 3 is always taken in the route choice case") {
  const DemoCase demo = route_choice_case();
  CHECK(demo_decision(demo, row({5.0, 1.0, 0.1})) == Selection{0, 2});
  CHECK(demo_decision(demo, row({1.0, 5.0, 0.1})) == Selection{1, 2});
  CHECK(demo_decision(demo, row({1.0, 5.0, -3.0})) == Selection{1, 2});
}

TEST_CASE("true boundaries match closed forms") {
  const DemoCase route = route_choice_case();
  auto truth_of = [](const DemoCase& d) {
    return [&d](double z) { return row(d.truth(z)); };
  };
  // 0.25 z^2 + 0.2 z - 4.5 = 0
  const double z_route = (-0.2 + std::sqrt(0.04 + 4.5)) / 0.5;
  CHECK(decision_boundary(route, truth_of(route)) == doctest::Approx(z_route).epsilon(1e-9));

  const DemoCase mix = coverage_mix_case();
  CHECK(decision_boundary(mix, truth_of(mix)) == doctest::Approx(std::atanh(1.0 / 2.8)).epsilon(1e-9));
}

TEST_CASE("linear boundary is the line intersection") {
  const DemoCase demo = route_choice_case();
  const LinearModel m{{-0.3, 1.2, 0.0}, {4.0, -1.0, 3.0}};
  const double expected = (4.0 - -1.0) / (1.2 - -0.3);
  CHECK(decision_boundary(demo, [&m](double z) { return m.predict(z); }) ==
        doctest::Approx(expected).epsilon(1e-9));

  const LinearModel flat{{0.0, 0.0, 0.0}, {2.0, 1.0, 3.0}};
  CHECK(std::isnan(decision_boundary(demo, [&flat](double z) { return flat.predict(z); })));
  CHECK_THROWS_AS(decision_boundary(demo, [&m](double z) { return m.predict(z); }, 1),
                  InvalidArgument);
}

TEST_CASE("least squares recovers noiseless lines") {
  std::vector<DemoSample> data;
  for (int i = 0; i < 20; ++i) {
    const double z = 0.1 * i;
    data.push_back({z, row({2.0 * z - 1.0, -0.5 * z + 3.0})});
  }
  const LinearModel m = fit_linear_mse(data);
  CHECK(m.slope[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.intercept[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(m.slope[1] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(m.intercept[1] == doctest::Approx(3.0).epsilon(1e-12));

  std::vector<DemoSample> same_z(3, DemoSample{1.0, row({1.0})});
  CHECK_THROWS_AS(fit_linear_mse(same_z), InvalidArgument);
  CHECK_THROWS_AS(fit_linear_mse(std::span<const DemoSample>(data.data(), 1)), InvalidArgument);
}

TEST_CASE("sampled data stays in range and is seeded") {
  const DemoCase mix = coverage_mix_case();
  const auto a = sample_demo_data(mix, 50, 3);
  const auto b = sample_demo_data(mix, 50, 3);
  const auto c = sample_demo_data(mix, 50, 4);
  REQUIRE(a.size() == 50);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].z >= mix.z_lo);
    CHECK(a[i].z < mix.z_hi);
    CHECK(a[i].w(0, 0) >= 0.0);
    CHECK(a[i].w(0, 0) <= 1.0);
    CHECK(a[i].w(0, 0) + a[i].w(0, 1) == doctest::Approx(1.0));
    CHECK(a[i].z == b[i].z);
    CHECK(a[i].w == b[i].w);
    differs = differs || a[i].z != c[i].z;
  }
  CHECK(differs);
  CHECK(sample_demo_data(mix, 0, 1).empty());
  CHECK_THROWS_AS(route_choice_case(-1.0), InvalidArgument);
}

TEST_CASE("decision-loss fit is seeded and moves toward the boundary") {
  const DemoCase demo = route_choice_case();
  DemoTrainConfig cfg;
  cfg.epochs = 60;
  const DemoRun a = run_demo(demo, 60, cfg, 11);
  const DemoRun b = run_demo(demo, 60, cfg, 11);
  CHECK(a.dol_model.slope == b.dol_model.slope);
  CHECK(a.dol_model.intercept == b.dol_model.intercept);
  CHECK(a.optimal == b.optimal);

  cfg.sg_trials = 0;
  CHECK_THROWS_AS(run_demo(demo, 60, cfg, 11), InvalidArgument);
}

TEST_CASE("dol_closer handles missing boundaries") {
  DemoRun r;
  r.optimal = 1.0;
  r.mse = 1.5;
  r.dol = 0.6;
  CHECK(r.dol_closer());
  r.dol = 1.6;
  CHECK_FALSE(r.dol_closer());
  r.mse = std::numeric_limits<double>::quiet_NaN();
  CHECK(r.dol_closer());
  r.dol = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(r.dol_closer());
}

TEST_CASE("sweep CSV schema") {
  const DemoCase demo = route_choice_case();
  DemoRun run;
  run.name = demo.name;
  run.mse_model = {{-0.2, 1.5, 0.0}, {4.5, -1.5, 3.0}};
  run.dol_model = {{-0.2, 1.3, 0.0}, {4.5, -1.5, 3.0}};
  const auto path = std::filesystem::temp_directory_path() / "dol_demo_sweep.csv";
  write_demo_sweep_csv(path.string(), demo, run, 11);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "z,w_hat0,w_hat1,w_hat2,decision,method");
  int rows = 0, truth_rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.ends_with(",truth")) ++truth_rows;
  }
  CHECK(rows == 33);
  CHECK(truth_rows == 11);
  std::filesystem::remove(path);

  const nlohmann::json j = to_json(run);
  CHECK(j.at("case") == "route_choice");
  CHECK(j.at("mse_model").at("slope").size() == 3);
}
