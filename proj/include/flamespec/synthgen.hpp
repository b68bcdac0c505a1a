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

// Synthetic flame-emission source: a parametric chemiluminescence model,
// a CCD acquisition model with photon, dark and read noise, and the
// experiment-design samplers that pick gas conditions.

#ifndef FLAMESPEC_SYNTHGEN_HPP_
#define FLAMESPEC_SYNTHGEN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "flamespec/spectral.hpp"

namespace flamespec {

/// One Gaussian line component of a band, relative to the band amplitude.
struct LineComponent {
  double center_nm = 0.0;
  double relative_amplitude = 1.0;
  double base_width_nm = 1.0;  // Gaussian sigma at 1 bar
};

/// Amplitude law A(P, phi) = amplitude * P^pressure_exponent * phi^phi_exponent,
/// in model rate units per pixel. Width law w(P) = base * (1 + broadening * (P - 1)).
struct EmissionBand {
  std::string name;
  std::vector<LineComponent> lines;
  double amplitude = 0.0;
  double pressure_exponent = 0.0;
  double phi_exponent = 0.0;
  double broadening_per_bar = 0.0;

  double Amplitude(const GasCondition& cond) const;
  double WidthScale(double pressure_bar) const;
  double Rate(double wavelength_nm, const GasCondition& cond) const;
};

/// Sum of emission bands plus a condition-independent floor. Rates are
/// expressed in electrons/s once multiplied by CcdConfig::electrons_per_unit().
struct EmitterModel {
  std::vector<EmissionBand> bands;  // the last entries may be broadband continua
  double floor_rate = 0.0;

  /// Versioned default table: OH*, CH*, C2*, H2O* and a CO2* continuum, scaled
  /// so the 308 nm rate at (10 bar, phi = 1) equals kOh308ReferenceRate.
  static EmitterModel Default();
  static constexpr int kDefaultVersion = 1;

  double Rate(double wavelength_nm, const GasCondition& cond) const;
  const EmissionBand* Find(const std::string& name) const;
};

/// Photoelectron rate at the 308 nm OH* pixel at (10 bar, phi = 1), e-/s.
inline constexpr double kOh308ReferenceRate = 463.0 / 0.2;

struct CcdConfig {
  double quantum_efficiency = 0.5;
  double photon_flux_scale = 2.0;       // photons/s per model rate unit
  double dark_current_eps = 9.1 * 9.1 / 0.2;  // ~414 e-/s
  double read_noise_e = 24.0;

  double electrons_per_unit() const { return quantum_efficiency * photon_flux_scale; }
  void Validate() const;
};

/// Noise-free per-pixel rate in model units. Deterministic.
std::vector<double> CleanSpectrum(const GasCondition& cond, const WavelengthGrid& grid,
                                  const EmitterModel& model);

/// One CCD read: Poisson(rate * eta * flux_scale * tau) + Poisson(I_dark * tau) +
/// Normal(0, N_R^2), in electrons. A zero rate vector yields a dark frame.
Spectrum Acquire(const WavelengthGrid& grid, const std::vector<double>& rate, double exposure_s,
                 const CcdConfig& ccd, std::uint64_t seed);

/// Expected per-pixel dark level I_dark * tau.
Spectrum ExpectedDark(const WavelengthGrid& grid, double exposure_s, const CcdConfig& ccd);

/// Analytic ratio n / sqrt(photon^2 + dark^2 + read^2).
double SnrEstimate(double n_electron, double sigma_photon, double sigma_dark, double sigma_read);

/// Predicted SNR of a pixel with photoelectron rate `electron_rate` (e-/s).
double PredictedSnr(double electron_rate, double exposure_s, const CcdConfig& ccd);

/// Derives an independent stream seed from a root seed and a counter tuple.
std::uint64_t StreamSeed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0,
                         std::uint64_t c = 0);

enum class PlanKind { kFullFactorial, kLatinHypercube };

struct SamplingPlan {
  PlanKind kind = PlanKind::kFullFactorial;
  std::size_t n_pressure = 5;  // full factorial levels
  std::size_t n_phi = 10;
  std::size_t n_samples = 30;  // latin hypercube
  double pressure_lo = kMinPressureBar;
  double pressure_hi = kMaxPressureBar;
  double phi_lo = kMinEquivalenceRatio;
  double phi_hi = kMaxEquivalenceRatio;
  std::uint64_t seed = 0;
};

std::vector<GasCondition> FullFactorial(const SamplingPlan& plan);
std::vector<GasCondition> LatinHypercube(const SamplingPlan& plan);

}  // namespace flamespec

#endif  // FLAMESPEC_SYNTHGEN_HPP_
