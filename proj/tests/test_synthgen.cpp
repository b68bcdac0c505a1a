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

#include <algorithm>
#include <set>

#include "flamespec/eval.hpp"
#include "flamespec/synthgen.hpp"
#include "test_util.hpp"

using namespace flamespec;

namespace {

double MeanOver(const std::vector<double>& rate, const WavelengthGrid& g, double lo, double hi) {
  double s = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < rate.size(); ++i) {
    if (g.center_nm(i) >= lo && g.center_nm(i) <= hi) s += rate[i], ++n;
  }
  return s / n;
}

// Monte-Carlo SNR of one pixel with a known rate.
double McSnr(double electron_rate, double tau, const CcdConfig& ccd, std::size_t repeats,
             std::uint64_t seed) {
  const WavelengthGrid g(300.0, 301.0, 2);
  const std::vector<double> rate(2, electron_rate / ccd.electrons_per_unit());
  std::vector<Spectrum> raw;
  for (std::size_t i = 0; i < repeats; ++i) raw.push_back(Acquire(g, rate, tau, ccd, StreamSeed(seed, i)));
  return eval::EmpiricalSnr(raw, 0, ExpectedDark(g, tau, ccd));
}

}  // namespace

TEST_CASE("clean spectrum trends") {
  const auto g = WavelengthGrid::Default();
  const auto m = EmitterModel::Default();
  const auto lean = CleanSpectrum({5.0, 0.8}, g, m);
  const auto rich = CleanSpectrum({5.0, 1.2}, g, m);
  CHECK(rich[g.nearest_pixel(431.4)] > lean[g.nearest_pixel(431.4)]);
  CHECK(rich[g.nearest_pixel(516.5)] > lean[g.nearest_pixel(516.5)]);
  const auto low = CleanSpectrum({1.0, 1.0}, g, m);
  const auto high = CleanSpectrum({10.0, 1.0}, g, m);
  CHECK(MeanOver(high, g, 700.0, 850.0) > MeanOver(low, g, 700.0, 850.0));
  CHECK(high[g.nearest_pixel(308.0)] < low[g.nearest_pixel(308.0)]);
  CHECK(CleanSpectrum({10.0, 1.0}, g, m) == high);
  for (double r : high) CHECK(r > 0.0);
  CHECK_ERROR_CODE(CleanSpectrum({0.5, 1.0}, g, m), ErrorCode::kOutOfEnvelope);
  CHECK_ERROR_CODE(CleanSpectrum({5.0, 1.3}, g, m), ErrorCode::kOutOfEnvelope);
}

TEST_CASE("emitter trend table holds on a 20x20 grid") {
  const auto m = EmitterModel::Default();
  auto at = [](int i) { return std::pair{1.0 + 9.0 * i / 19.0, 0.8 + 0.4 * i / 19.0}; };
  for (const auto& band : m.bands) {
    for (int i = 0; i < 20; ++i) {
      for (int j = 1; j < 20; ++j) {
        const double p = at(i).first, p0 = at(j - 1).first, p1 = at(j).first;
        const double f = at(i).second, f0 = at(j - 1).second, f1 = at(j).second;
        CHECK(band.Amplitude({p, f}) > 0.0);
        CHECK(band.WidthScale(p1) >= band.WidthScale(p0));
        // Monotone in each axis with the sign of its exponent.
        const double dp = band.Amplitude({p1, f}) - band.Amplitude({p0, f});
        const double df = band.Amplitude({p, f1}) - band.Amplitude({p, f0});
        CHECK(dp * band.pressure_exponent >= 0.0);
        CHECK(df * band.phi_exponent >= 0.0);
      }
    }
  }
  const auto* oh = m.Find("OH*");
  REQUIRE(oh != nullptr);
  CHECK(oh->pressure_exponent < 0.0);
}

TEST_CASE("default model hits the 308 nm reference rate") {
  const auto g = WavelengthGrid::Default();
  const auto rate = CleanSpectrum({10.0, 1.0}, g, EmitterModel::Default());
  const CcdConfig ccd;
  CHECK(rate[g.nearest_pixel(308.0)] * ccd.electrons_per_unit() ==
        doctest::Approx(kOh308ReferenceRate).epsilon(1e-9));
}

TEST_CASE("distinct conditions give distinct clean spectra") {
  const auto g = WavelengthGrid::Default();
  SamplingPlan plan;
  const auto conds = FullFactorial(plan);
  REQUIRE(conds.size() == 50);
  std::vector<std::vector<double>> spectra;
  for (const auto& c : conds) spectra.push_back(CleanSpectrum(c, g, EmitterModel::Default()));
  double min_d = 1e300;
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < spectra[i].size(); ++k) {
        d += (spectra[i][k] - spectra[j][k]) * (spectra[i][k] - spectra[j][k]);
      }
      min_d = std::min(min_d, d);
    }
  }
  CHECK(min_d > 0.0);
}

TEST_CASE("acquire: read-noise-only case is centered") {
  CcdConfig ccd;
  ccd.dark_current_eps = 0.0;
  const WavelengthGrid g(300.0, 400.0, 1000);
  const auto s = Acquire(g, std::vector<double>(1000, 0.0), 0.2, ccd, 5);
  double mean = 0.0;
  for (double x : s.intensities()) mean += x;
  mean /= 1000.0;
  CHECK(std::abs(mean) < 3.0 * ccd.read_noise_e / std::sqrt(1000.0));
  CHECK(s.stage() == Stage::kRawCounts);
}

TEST_CASE("acquire is reproducible and mean-unbiased") {
  const CcdConfig ccd;
  const WavelengthGrid g(300.0, 301.0, 3);
  const std::vector<double> rate{10.0, 500.0, 2000.0};
  CHECK(Acquire(g, rate, 0.2, ccd, 9).intensities()[1] ==
        Acquire(g, rate, 0.2, ccd, 9).intensities()[1]);
  const std::size_t n = 10000;
  std::vector<double> sum(3, 0.0), sum2(3, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = Acquire(g, rate, 0.2, ccd, StreamSeed(77, i));
    for (std::size_t p = 0; p < 3; ++p) sum[p] += s[p], sum2[p] += s[p] * s[p];
  }
  for (std::size_t p = 0; p < 3; ++p) {
    const double mean = sum[p] / double(n);
    const double var = sum2[p] / double(n) - mean * mean;
    const double expect = rate[p] * ccd.electrons_per_unit() * 0.2 + ccd.dark_current_eps * 0.2;
    CHECK(std::abs(mean - expect) < 4.0 * std::sqrt(var / double(n)));
  }
}

TEST_CASE("dark subtraction residual is centered") {
  const CcdConfig ccd;
  const WavelengthGrid g(300.0, 400.0, 50);
  const std::vector<double> zero(50, 0.0);
  const auto dark = ExpectedDark(g, 0.2, ccd);
  double sum = 0.0;
  const std::size_t n = 1000;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = DarkSubtract(Acquire(g, zero, 0.2, ccd, StreamSeed(4, i)), dark);
    for (double x : r.intensities()) sum += x;
  }
  const double count = double(n * 50);
  const double sigma = std::sqrt(ccd.dark_current_eps * 0.2 + ccd.read_noise_e * ccd.read_noise_e);
  CHECK(std::abs(sum / count) < 3.0 * sigma / std::sqrt(count));
}

TEST_CASE("snr estimate") {
  CHECK(SnrEstimate(463, 22, 9.1, 24) == doctest::Approx(13.7).epsilon(0.005));
  CHECK(SnrEstimate(115, 11, 4.6, 24) == doctest::Approx(4.29).epsilon(0.005));
  CHECK(SnrEstimate(100, 10, 0, 0) == doctest::Approx(10.0));
  CHECK_ERROR_CODE(SnrEstimate(1, 0, 0, 0), ErrorCode::kZeroDenominator);
  CHECK_ERROR_CODE(SnrEstimate(1, -1, 0, 0), ErrorCode::kConfigInvalid);
}

TEST_CASE("Monte-Carlo SNR scaling") {
  const CcdConfig ccd;
  // Shot-noise-dominated: quadrupling exposure doubles SNR.
  const double r1 = McSnr(1e6, 0.2, ccd, 1000, 1);
  const double r4 = McSnr(1e6, 0.8, ccd, 1000, 2);
  CHECK(r4 / r1 >= 1.9);
  CHECK(r4 / r1 <= 2.1);
  // Large signal approaches the sqrt(signal) asymptote.
  const double n = 1e6 * 2.0;
  CHECK(McSnr(1e6, 2.0, ccd, 1000, 3) == doctest::Approx(std::sqrt(n)).epsilon(0.05));
  // Reference OH rate at 0.2 s.
  CHECK(McSnr(kOh308ReferenceRate, 0.2, ccd, 1000, 4) == doctest::Approx(14.0).epsilon(0.10));
}

TEST_CASE("full factorial designs") {
  SamplingPlan p;
  p.n_pressure = 2;
  p.n_phi = 2;
  const auto corners = FullFactorial(p);
  REQUIRE(corners.size() == 4);
  const std::set<std::pair<double, double>> want{{1, 0.8}, {1, 1.2}, {10, 0.8}, {10, 1.2}};
  std::set<std::pair<double, double>> got;
  for (const auto& c : corners) got.insert({c.pressure_bar, c.equivalence_ratio});
  CHECK(got == want);

  p.n_pressure = p.n_phi = 1;
  const auto mid = FullFactorial(p);
  REQUIRE(mid.size() == 1);
  CHECK(mid[0].pressure_bar == 5.5);
  CHECK(mid[0].equivalence_ratio == doctest::Approx(1.0));

  p.n_pressure = 0;
  CHECK_ERROR_CODE(FullFactorial(p), ErrorCode::kBadPlan);
  p.n_pressure = 2;
  p.pressure_hi = 11.0;
  CHECK_ERROR_CODE(FullFactorial(p), ErrorCode::kBadPlan);
  p.pressure_hi = 10.0;
  p.kind = PlanKind::kLatinHypercube;
  CHECK_ERROR_CODE(FullFactorial(p), ErrorCode::kBadPlan);
}

TEST_CASE("latin hypercube stratification") {
  SamplingPlan p;
  p.kind = PlanKind::kLatinHypercube;
  p.n_samples = 30;
  p.seed = 42;
  const auto s = LatinHypercube(p);
  REQUIRE(s.size() == 30);
  std::set<int> ps, fs;
  for (const auto& c : s) {
    CHECK(c.InEnvelope());
    ps.insert(int((c.pressure_bar - 1.0) / 9.0 * 30.0));
    fs.insert(int((c.equivalence_ratio - 0.8) / 0.4 * 30.0));
  }
  CHECK(ps.size() == 30);
  CHECK(fs.size() == 30);
  const auto again = LatinHypercube(p);
  CHECK(again == s);

  p.n_samples = 1;
  const auto one = LatinHypercube(p);
  REQUIRE(one.size() == 1);
  CHECK(one[0].InEnvelope());
  p.n_samples = 0;
  CHECK_ERROR_CODE(LatinHypercube(p), ErrorCode::kBadPlan);
}

TEST_CASE("stream seeds differ per stream") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 4; ++a) {
    for (std::uint64_t b = 0; b < 50; ++b) seen.insert(StreamSeed(1, a, b));
  }
  CHECK(seen.size() == 200);
  CHECK(StreamSeed(1, 2, 3) == StreamSeed(1, 2, 3));
}
