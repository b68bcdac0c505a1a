// Copyright 2026 The flamespec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "flamespec/eval.hpp"
#include "test_util.hpp"

using namespace flamespec;
using namespace flamespec::eval;

namespace {

constexpr std::size_t kWidth = 16;

// Smooth, condition-dependent toy spectrum.
std::vector<double> Toy(double p, double phi) {
  std::vector<double> v(kWidth);
  for (std::size_t j = 0; j < kWidth; ++j) {
    const double x = double(j);
    v[j] = 1.0 + 0.05 * p * std::sin(x) + 0.3 * phi * std::cos(0.5 * x) + 0.01 * p * phi * x;
  }
  return v;
}

struct Surrogate {
  PodModel pod;
  KrigingModel kriging;
  std::vector<EvalCondition> calibration;
};

Surrogate Fit() {
  std::vector<GasCondition> grid;
  for (double p : {1.0, 4.0, 7.0, 10.0})
    for (double f : {0.8, 0.93, 1.07, 1.2}) grid.push_back({p, f});
  Eigen::MatrixXd snaps(Eigen::Index(grid.size()), Eigen::Index(kWidth));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto v = Toy(grid[i].pressure_bar, grid[i].equivalence_ratio);
    snaps.row(Eigen::Index(i)) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), Eigen::Index(kWidth));
  }
  PodModel pod = PodModel::Fit(snaps, 3);
  Eigen::MatrixXd sites(snaps.rows(), 3), targets(snaps.rows(), 2);
  std::vector<EvalCondition> cal;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto v = Toy(grid[i].pressure_bar, grid[i].equivalence_ratio);
    sites.row(Eigen::Index(i)) = pod.NormalizedCoeffs(v).transpose();
    targets.row(Eigen::Index(i)) << grid[i].pressure_bar, grid[i].equivalence_ratio;
    cal.push_back({grid[i], {v, v}});
  }
  KrigingModel k = KrigingModel::Fit(sites, targets);
  return {std::move(pod), std::move(k), std::move(cal)};
}

}  // namespace

TEST_CASE("metrics on hand-computed cases") {
  const MetricValues m = Metrics({{2.0, {1.0, 3.0}}});
  CHECK(m.relative_error == doctest::Approx(50.0));
  CHECK(m.rsd == doctest::Approx(100.0 * std::sqrt(2.0) / 2.0));

  const MetricValues two = Metrics({{2.0, {1.0, 3.0}}, {4.0, {4.0, 4.0, 4.0}}});
  CHECK(two.relative_error == doctest::Approx(25.0));
  CHECK(two.rsd == doctest::Approx(50.0 * std::sqrt(2.0) / 2.0));

  // Sign of the truth does not matter.
  CHECK(Metrics({{-2.0, {-1.0, -3.0}}}).relative_error == doctest::Approx(50.0));
  const MetricValues exact = Metrics({{0.9, {0.9, 0.9}}});
  CHECK(exact.relative_error == 0.0);
  CHECK(exact.rsd == 0.0);

  CHECK_ERROR_CODE(Metrics({}), ErrorCode::kEmptyInput);
  CHECK_ERROR_CODE(Metrics({{1.0, {}}}), ErrorCode::kEmptyInput);
}

TEST_CASE("empirical SNR") {
  const WavelengthGrid g(0.0, 3.0, 4);
  const Spectrum dark(g, {5.0, 5.0, 5.0, 5.0}, 0.1, Stage::kRawCounts);
  std::vector<Spectrum> raw;
  for (int i = 0; i < 30; ++i) {
    const double v = 15.0 + (i % 2 == 0 ? 1.0 : -1.0);
    raw.emplace_back(g, std::vector<double>{v, v, 7.0, v}, 0.1, Stage::kRawCounts);
  }
  CHECK(EmpiricalSnr(raw, 0, dark) == doctest::Approx(10.0 / std::sqrt(30.0 / 29.0)));
  CHECK_ERROR_CODE(EmpiricalSnr(raw, 2, dark), ErrorCode::kNotStochastic);
  raw.pop_back();
  CHECK_ERROR_CODE(EmpiricalSnr(raw, 0, dark), ErrorCode::kEmptyInput);
}

TEST_CASE("scheme comparison") {
  const Surrogate s = Fit();
  const std::vector<EvalCondition> test{{{2.5, 0.9}, {Toy(2.5, 0.9)}}, {{8.5, 1.1}, {Toy(8.5, 1.1)}}};

  dnn::DenoiserNet zero(dnn::NetworkConfig{3, 2, 3, 2, kWidth}, 1);
  std::fill(zero.convs().back().weight.begin(), zero.convs().back().weight.end(), 0.0);
  const auto results = CompareSchemes(s.calibration, test, s.pod, s.kriging, {{"raw", nullptr}, {"zero", &zero}});
  REQUIRE(results.size() == 2);
  CHECK(results[0].scheme == "raw");
  CHECK(results[1].scheme == "zero");

  // Calibration spectra sit on the kriging sites.
  CHECK(results[0].pressure_calibration.relative_error < 0.1);
  CHECK(results[0].phi_calibration.relative_error < 0.1);

  // Test metrics agree with scoring each spectrum by hand.
  std::vector<ConditionPredictions> p, f;
  for (const auto& c : test) {
    const auto pred = PredictCondition(c.low_snr[0], {"raw", nullptr}, s.pod, s.kriging);
    p.push_back({c.truth.pressure_bar, {pred(0)}});
    f.push_back({c.truth.equivalence_ratio, {pred(1)}});
  }
  CHECK(results[0].pressure_prediction.relative_error == Metrics(p).relative_error);
  CHECK(results[0].phi_prediction.relative_error == Metrics(f).relative_error);

  // A net that outputs zeros maps every input to the same estimate.
  const auto& rows = results[1].rows;
  REQUIRE(rows.size() == s.calibration.size() + test.size());
  CHECK(rows.back().is_test);
  CHECK_FALSE(rows.front().is_test);
  for (const auto& r : rows) {
    CHECK(r.pressure_mean == rows[0].pressure_mean);
    CHECK(r.pressure_std == 0.0);
  }

  CHECK_ERROR_CODE(CompareSchemes(s.calibration, {}, s.pod, s.kriging, {{"raw", nullptr}}),
                   ErrorCode::kEmptyInput);
  CHECK_ERROR_CODE(CompareSchemes(s.calibration, {{{2.0, 1.0}, {}}}, s.pod, s.kriging, {{"raw", nullptr}}),
                   ErrorCode::kEmptyInput);
}

TEST_CASE("exposure sweep reports accuracy per scheme") {
  const Surrogate s = Fit();
  dnn::DenoiserNet net(dnn::NetworkConfig{3, 2, 3, 2, kWidth}, 2);
  std::vector<double> seen;
  ExposureSweepHooks hooks;
  hooks.regenerate = [&](double tau) {
    seen.push_back(tau);
    SweepInputs in;
    in.pod = &s.pod;
    in.kriging = &s.kriging;
    in.calibration = s.calibration;
    in.test = {{{5.0, 1.0}, {Toy(5.0, 1.0)}}};
    return in;
  };
  hooks.snr = [](double tau) { return 100.0 * tau; };
  hooks.networks = {{"du", net.config(), 0.1}};
  hooks.reuse = {&net};
  const auto rows = ExposureSweep({0.1, 0.3}, hooks);
  CHECK(seen == std::vector<double>{0.1, 0.3});
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].snr == doctest::Approx(30.0));
  CHECK(rows[0].schemes == std::vector<std::string>{"raw", "du"});
  const auto ref = CompareSchemes(s.calibration, {{{5.0, 1.0}, {Toy(5.0, 1.0)}}}, s.pod, s.kriging,
                                  {{"raw", nullptr}, {"du", &net}});
  CHECK(rows[0].pressure_accuracy[0] == 100.0 - ref[0].pressure_prediction.relative_error);
  CHECK(rows[0].phi_accuracy[1] == 100.0 - ref[1].phi_prediction.relative_error);

  CHECK_ERROR_CODE(ExposureSweep({}, hooks), ErrorCode::kEmptyInput);
  CHECK_ERROR_CODE(ExposureSweep({-1.0}, hooks), ErrorCode::kConfigInvalid);
  hooks.reuse = {&net, &net};
  CHECK_ERROR_CODE(ExposureSweep({0.1}, hooks), ErrorCode::kEmptyInput);
}
