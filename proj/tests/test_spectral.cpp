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

#include <numeric>

#include "flamespec/pod.hpp"
#include "flamespec/spectral.hpp"
#include "test_util.hpp"

using namespace flamespec;

namespace {

Spectrum Make(const WavelengthGrid& g, std::vector<double> v, Stage stage = Stage::kRawCounts,
              double tau = 0.2) {
  return Spectrum(g, std::move(v), tau, stage);
}

}  // namespace

TEST_CASE("grid is affine and validated") {
  const WavelengthGrid g(250.0, 850.0, 1696);
  CHECK(g.center_nm(0) == 250.0);
  CHECK(g.center_nm(1695) == doctest::Approx(850.0).epsilon(1e-12));
  for (std::size_t i = 1; i < g.n_pixels(); ++i) CHECK(g.center_nm(i) > g.center_nm(i - 1));
  CHECK(WavelengthGrid::Default() == g);
  CHECK(g.nearest_pixel(250.0) == 0);
  CHECK(g.nearest_pixel(850.0) == 1695);
  CHECK_ERROR_CODE(WavelengthGrid(850.0, 250.0, 10), ErrorCode::kInvalidGrid);
  CHECK_ERROR_CODE(WavelengthGrid(250.0, 850.0, 1), ErrorCode::kInvalidGrid);
}

TEST_CASE("spectrum invariants") {
  const WavelengthGrid g(0.0, 9.0, 10);
  CHECK_ERROR_CODE(Make(g, std::vector<double>(9, 1.0)), ErrorCode::kLengthMismatch);
  CHECK_ERROR_CODE(Spectrum(g, std::vector<double>(10, 1.0), 0.0, Stage::kRawCounts),
                   ErrorCode::kConfigInvalid);
  for (Stage s : {Stage::kRawCounts, Stage::kDarkSubtracted, Stage::kOhNormalized}) {
    CHECK(StageFromName(StageName(s)) == s);
  }
  CHECK_ERROR_CODE(StageFromName("bogus"), ErrorCode::kFormat);
}

TEST_CASE("band mean") {
  const WavelengthGrid g(0.0, 9.0, 10);  // centers 0, 1, ..., 9
  CHECK(BandMean(Make(g, std::vector<double>(10, 3.25)), 2.0, 7.0) == 3.25);
  std::vector<double> v(10, 0.0);
  v[4] = 7.5;
  CHECK(BandMean(Make(g, v), 3.5, 4.5) == 7.5);
  std::iota(v.begin(), v.end(), 0.0);
  CHECK(BandMean(Make(g, v), 1.0, 4.0) == 2.5);  // pixels 1..4
  CHECK_ERROR_CODE(BandMean(Make(g, v), 4.2, 4.8), ErrorCode::kEmptyBand);
  CHECK_ERROR_CODE(BandMean(Make(g, v), 5.0, 4.0), ErrorCode::kEmptyBand);
}

TEST_CASE("dark subtraction") {
  const WavelengthGrid g(0.0, 9.0, 10);
  const Spectrum s = Make(g, std::vector<double>(10, 100.0));
  const Spectrum d = Make(g, std::vector<double>(10, 40.0));
  const Spectrum r = DarkSubtract(s, d);
  CHECK(r.stage() == Stage::kDarkSubtracted);
  for (double x : r.intensities()) CHECK(x == 60.0);
  const Spectrum self = DarkSubtract(s, s);
  for (double x : self.intensities()) CHECK(x == 0.0);

  // Negative values are kept.
  const Spectrum neg = DarkSubtract(d, s);
  CHECK(neg[0] == -60.0);

  CHECK_ERROR_CODE(DarkSubtract(s, Make(WavelengthGrid(0.0, 10.0, 10), std::vector<double>(10))),
                   ErrorCode::kGridMismatch);
  CHECK_ERROR_CODE(DarkSubtract(s, Make(g, std::vector<double>(10), Stage::kRawCounts, 0.4)),
                   ErrorCode::kExposureMismatch);
  CHECK_ERROR_CODE(DarkSubtract(r, d), ErrorCode::kStageMismatch);
}

TEST_CASE("OH normalization") {
  const WavelengthGrid g = WavelengthGrid::Default();
  const Spectrum flat = Make(g, std::vector<double>(g.n_pixels(), 8.0), Stage::kDarkSubtracted);
  const Spectrum n = OhNormalize(flat);
  CHECK(n.stage() == Stage::kOhNormalized);
  for (double x : n.intensities()) CHECK(x == doctest::Approx(1.0).epsilon(1e-15));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  std::vector<double> v(g.n_pixels());
  for (double& x : v) x = u(rng);
  const Spectrum r = OhNormalize(Make(g, v, Stage::kDarkSubtracted));
  CHECK(std::abs(BandMean(r, kOhBandLoNm, kOhBandHiNm) - 1.0) < 1e-9);
  // Normalizing an already normalized spectrum is the identity.
  const Spectrum again = OhNormalize(Make(g, {r.intensities().begin(), r.intensities().end()},
                                          Stage::kDarkSubtracted));
  for (std::size_t i = 0; i < g.n_pixels(); ++i) CHECK(again[i] == doctest::Approx(r[i]));

  CHECK_ERROR_CODE(OhNormalize(Make(g, std::vector<double>(g.n_pixels(), -1.0),
                                    Stage::kDarkSubtracted)),
                   ErrorCode::kNonPositiveBand);
  CHECK_ERROR_CODE(OhNormalize(Make(g, v)), ErrorCode::kStageMismatch);
}

TEST_CASE("augmentation scales both members by one factor") {
  const WavelengthGrid g(0.0, 9.0, 10);
  const SpectrumPair p(Make(g, std::vector<double>(10, 1.0), Stage::kOhNormalized, 0.2),
                       Make(g, std::vector<double>(10, 1.0), Stage::kOhNormalized, 2.0),
                       {5.0, 1.0});
  const SpectrumPair same = AugmentIntensity(p, 1.0);
  for (std::size_t i = 0; i < 10; ++i) CHECK(same.low_snr()[i] == 1.0);
  const SpectrumPair up = AugmentIntensity(p, 1.2);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(up.low_snr()[i] == doctest::Approx(1.2));
    CHECK(up.high_snr()[i] == doctest::Approx(1.2));
  }
  CHECK(up.condition() == p.condition());
  CHECK_ERROR_CODE(AugmentIntensity(p, 1.21), ErrorCode::kFactorOutOfRange);
  CHECK_ERROR_CODE(AugmentIntensity(p, 0.79), ErrorCode::kFactorOutOfRange);
}

TEST_CASE("augmentation commutes with unnormalized projection") {
  const std::size_t w = 12;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd snaps(8, Eigen::Index(w));
  for (Eigen::Index i = 0; i < snaps.size(); ++i) snaps.data()[i] = n01(rng);
  const PodModel pod = PodModel::Fit(snaps, 3);
  const WavelengthGrid g(0.0, 11.0, w);
  std::vector<double> y(w);
  for (double& v : y) v = n01(rng);
  const SpectrumPair p(Make(g, y, Stage::kOhNormalized, 0.2), Make(g, y, Stage::kOhNormalized, 2.0),
                       {1.0, 1.0});
  const SpectrumPair a = AugmentIntensity(p, 0.85);
  const Eigen::VectorXd c0 = pod.Project(p.high_snr().intensities());
  const Eigen::VectorXd c1 = pod.Project(a.high_snr().intensities());
  CHECK((c1 - 0.85 * c0).norm() < 1e-12 * (1.0 + c0.norm()));
}

TEST_CASE("pair invariants") {
  const WavelengthGrid g(0.0, 9.0, 10);
  const auto ls = Make(g, std::vector<double>(10, 1.0), Stage::kOhNormalized, 0.2);
  const auto hs = Make(g, std::vector<double>(10, 1.0), Stage::kOhNormalized, 2.0);
  CHECK_ERROR_CODE(SpectrumPair(hs, ls, {}), ErrorCode::kExposureMismatch);
  CHECK_ERROR_CODE(SpectrumPair(Make(g, std::vector<double>(10, 1.0), Stage::kRawCounts, 0.2), hs, {}),
                   ErrorCode::kStageMismatch);
  CHECK_ERROR_CODE(
      SpectrumPair(ls, Make(WavelengthGrid(0.0, 10.0, 10), std::vector<double>(10, 1.0),
                            Stage::kOhNormalized, 2.0),
                   {}),
      ErrorCode::kGridMismatch);
}
