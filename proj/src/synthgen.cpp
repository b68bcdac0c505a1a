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

#include "flamespec/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "flamespec/error.hpp"

namespace flamespec {

double EmissionBand::Amplitude(const GasCondition& cond) const {
  return amplitude * std::pow(cond.pressure_bar, pressure_exponent) *
         std::pow(cond.equivalence_ratio, phi_exponent);
}

double EmissionBand::WidthScale(double pressure_bar) const {
  return 1.0 + broadening_per_bar * (pressure_bar - 1.0);
}

double EmissionBand::Rate(double wavelength_nm, const GasCondition& cond) const {
  const double a = Amplitude(cond);
  const double ws = WidthScale(cond.pressure_bar);
  double profile = 0.0;
  for (const auto& line : lines) {
    const double z = (wavelength_nm - line.center_nm) / (line.base_width_nm * ws);
    profile += line.relative_amplitude * std::exp(-0.5 * z * z);
  }
  return a * profile;
}

double EmitterModel::Rate(double wavelength_nm, const GasCondition& cond) const {
  double r = floor_rate;
  for (const auto& band : bands) r += band.Rate(wavelength_nm, cond);
  return r;
}

const EmissionBand* EmitterModel::Find(const std::string& name) const {
  for (const auto& band : bands) {
    if (band.name == name) return &band;
  }
  return nullptr;
}

EmitterModel EmitterModel::Default() {
  // Version 1 constants. Amplitudes are relative to the OH* band and are
  // rescaled below; exponents encode the trend table:
  //   OH*, CH*, C2* weaken with P; H2O* and the CO2* continuum strengthen.
  //   CH* and C2* grow strongly with phi.
  EmitterModel m;
  m.bands = {
      {"OH*",
       {{306.4, 1.00, 0.90}, {308.9, 0.55, 1.60}, {311.6, 0.20, 1.50}},
       1.00, -0.35, 0.50, 0.030},
      {"CH*",
       {{431.4, 1.00, 1.20}, {428.6, 0.30, 2.00}, {390.0, 0.12, 1.50}},
       0.50, -0.50, 3.00, 0.030},
      {"C2*",
       {{516.5, 1.00, 1.30}, {512.9, 0.45, 1.50}, {473.7, 0.35, 1.50}, {563.5, 0.25, 1.60}},
       0.40, -0.45, 4.00, 0.030},
      {"H2O*",
       {{722.0, 1.00, 18.0}, {790.0, 0.80, 25.0}, {832.0, 0.90, 15.0}},
       0.12, 0.45, 0.30, 0.020},
      {"CO2*",
       {{450.0, 1.00, 130.0}},
       0.08, 0.30, 0.60, 0.000},
  };
  m.floor_rate = 0.005 * kOh308ReferenceRate;
  const GasCondition ref{10.0, 1.0};
  // Scale at the center of the default-grid pixel that holds 308 nm; that
  // pixel is what the detector reports.
  const auto grid = WavelengthGrid::Default();
  const double at = grid.center_nm(grid.nearest_pixel(308.0));
  const double band_rate = m.Rate(at, ref) - m.floor_rate;
  const double scale = (kOh308ReferenceRate - m.floor_rate) / band_rate;
  for (auto& band : m.bands) band.amplitude *= scale;
  return m;
}

void CcdConfig::Validate() const {
  if (!(quantum_efficiency > 0.0 && quantum_efficiency <= 1.0)) {
    throw Error(ErrorCode::kConfigInvalid, "ccd.quantum_efficiency must lie in (0, 1]");
  }
  if (!(photon_flux_scale > 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "ccd.photon_flux_scale must be > 0");
  }
  if (!(dark_current_eps > 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "ccd.dark_current_eps must be > 0");
  }
  if (!(read_noise_e > 0.0)) throw Error(ErrorCode::kConfigInvalid, "ccd.read_noise_e must be > 0");
}

std::vector<double> CleanSpectrum(const GasCondition& cond, const WavelengthGrid& grid,
                                  const EmitterModel& model) {
  if (!cond.InEnvelope()) {
    throw Error(ErrorCode::kOutOfEnvelope,
                "condition (P=" + std::to_string(cond.pressure_bar) +
                    " bar, phi=" + std::to_string(cond.equivalence_ratio) +
                    ") outside [1, 10] bar x [0.8, 1.2]");
  }
  std::vector<double> rate(grid.n_pixels());
  for (std::size_t i = 0; i < rate.size(); ++i) rate[i] = model.Rate(grid.center_nm(i), cond);
  return rate;
}

namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double SamplePoisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0.0;
  std::poisson_distribution<long long> dist(mean);
  return double(dist(rng));
}

}  // namespace

std::uint64_t StreamSeed(std::uint64_t root, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = SplitMix64(root);
  h = SplitMix64(h ^ a);
  h = SplitMix64(h ^ (b + 0x632be59bd9b4e019ULL));
  h = SplitMix64(h ^ (c + 0x85157af5ULL));
  return h;
}

Spectrum Acquire(const WavelengthGrid& grid, const std::vector<double>& rate, double exposure_s,
                 const CcdConfig& ccd, std::uint64_t seed) {
  if (rate.size() != grid.n_pixels()) {
    throw Error(ErrorCode::kLengthMismatch, "rate vector length differs from grid");
  }
  if (!(exposure_s > 0.0)) throw Error(ErrorCode::kConfigInvalid, "exposure must be > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> read(0.0, ccd.read_noise_e);
  const double gain = ccd.electrons_per_unit() * exposure_s;
  const double dark_mean = ccd.dark_current_eps * exposure_s;
  std::vector<double> counts(rate.size());
  for (std::size_t i = 0; i < rate.size(); ++i) {
    const double photo = SamplePoisson(rng, rate[i] * gain);
    const double dark = SamplePoisson(rng, dark_mean);
    counts[i] = photo + dark + read(rng);
  }
  return Spectrum(grid, std::move(counts), exposure_s, Stage::kRawCounts);
}

Spectrum ExpectedDark(const WavelengthGrid& grid, double exposure_s, const CcdConfig& ccd) {
  return Spectrum(grid, std::vector<double>(grid.n_pixels(), ccd.dark_current_eps * exposure_s),
                  exposure_s, Stage::kRawCounts);
}

double SnrEstimate(double n_electron, double sigma_photon, double sigma_dark, double sigma_read) {
  if (sigma_photon < 0.0 || sigma_dark < 0.0 || sigma_read < 0.0 || n_electron < 0.0) {
    throw Error(ErrorCode::kConfigInvalid, "SNR inputs must be non-negative");
  }
  const double denom = std::sqrt(sigma_photon * sigma_photon + sigma_dark * sigma_dark +
                                 sigma_read * sigma_read);
  if (!(denom > 0.0)) throw Error(ErrorCode::kZeroDenominator, "total noise is zero");
  return n_electron / denom;
}

double PredictedSnr(double electron_rate, double exposure_s, const CcdConfig& ccd) {
  const double n = electron_rate * exposure_s;
  return SnrEstimate(n, std::sqrt(n), std::sqrt(ccd.dark_current_eps * exposure_s),
                     ccd.read_noise_e);
}

namespace {

void CheckRanges(const SamplingPlan& plan) {
  const bool ok = plan.pressure_lo <= plan.pressure_hi && plan.phi_lo <= plan.phi_hi &&
                  plan.pressure_lo >= kMinPressureBar && plan.pressure_hi <= kMaxPressureBar &&
                  plan.phi_lo >= kMinEquivalenceRatio && plan.phi_hi <= kMaxEquivalenceRatio;
  if (!ok) throw Error(ErrorCode::kBadPlan, "plan ranges must lie inside [1, 10] bar x [0.8, 1.2]");
}

std::vector<double> Levels(std::size_t n, double lo, double hi) {
  if (n == 1) return {0.5 * (lo + hi)};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * double(i) / double(n - 1);
  return out;
}

}  // namespace

std::vector<GasCondition> FullFactorial(const SamplingPlan& plan) {
  if (plan.kind != PlanKind::kFullFactorial) {
    throw Error(ErrorCode::kBadPlan, "plan is not a full factorial design");
  }
  if (plan.n_pressure < 1 || plan.n_phi < 1) {
    throw Error(ErrorCode::kBadPlan, "full factorial requires at least one level per axis");
  }
  CheckRanges(plan);
  std::vector<GasCondition> out;
  out.reserve(plan.n_pressure * plan.n_phi);
  for (double p : Levels(plan.n_pressure, plan.pressure_lo, plan.pressure_hi)) {
    for (double phi : Levels(plan.n_phi, plan.phi_lo, plan.phi_hi)) out.push_back({p, phi});
  }
  return out;
}

std::vector<GasCondition> LatinHypercube(const SamplingPlan& plan) {
  if (plan.kind != PlanKind::kLatinHypercube) {
    throw Error(ErrorCode::kBadPlan, "plan is not a Latin hypercube design");
  }
  if (plan.n_samples < 1) throw Error(ErrorCode::kBadPlan, "Latin hypercube requires n >= 1");
  CheckRanges(plan);
  const std::size_t n = plan.n_samples;
  std::mt19937_64 rng(StreamSeed(plan.seed, 0x4c4853));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto axis = [&](double lo, double hi) {
    std::vector<std::size_t> strata(n);
    std::iota(strata.begin(), strata.end(), 0);
    std::shuffle(strata.begin(), strata.end(), rng);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = lo + (hi - lo) * (double(strata[i]) + unit(rng)) / double(n);
    }
    return values;
  };
  const auto pressure = axis(plan.pressure_lo, plan.pressure_hi);
  const auto phi = axis(plan.phi_lo, plan.phi_hi);
  std::vector<GasCondition> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {pressure[i], phi[i]};
  return out;
}

}  // namespace flamespec
