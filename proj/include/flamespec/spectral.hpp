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

// Spectral value types and the preprocessing chain applied to every
// acquisition: dark subtraction, OH* band normalization, and the intensity
// augmentation used while training the denoiser.

#ifndef FLAMESPEC_SPECTRAL_HPP_
#define FLAMESPEC_SPECTRAL_HPP_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace flamespec {

/// Affine pixel-to-wavelength map. Pixel i is centered at
/// start + i * (end - start) / (n - 1).
class WavelengthGrid {
 public:
  WavelengthGrid(double start_nm, double end_nm, std::size_t n_pixels);

  /// 1696 pixels over 250..850 nm.
  static WavelengthGrid Default();

  double start_nm() const { return start_nm_; }
  double end_nm() const { return end_nm_; }
  std::size_t n_pixels() const { return n_pixels_; }
  double step_nm() const { return (end_nm_ - start_nm_) / double(n_pixels_ - 1); }
  double center_nm(std::size_t pixel) const { return start_nm_ + double(pixel) * step_nm(); }
  std::size_t nearest_pixel(double wavelength_nm) const;

  friend bool operator==(const WavelengthGrid&, const WavelengthGrid&) = default;

 private:
  double start_nm_;
  double end_nm_;
  std::size_t n_pixels_;
};

/// Supported generator envelope.
inline constexpr double kMinPressureBar = 1.0;
inline constexpr double kMaxPressureBar = 10.0;
inline constexpr double kMinEquivalenceRatio = 0.8;
inline constexpr double kMaxEquivalenceRatio = 1.2;

struct GasCondition {
  double pressure_bar = 1.0;
  double equivalence_ratio = 1.0;

  bool InEnvelope() const;
  friend bool operator==(const GasCondition&, const GasCondition&) = default;
};

enum class Stage { kRawCounts, kDarkSubtracted, kOhNormalized };

std::string_view StageName(Stage stage);
Stage StageFromName(std::string_view name);

/// OH* normalization window.
inline constexpr double kOhBandLoNm = 306.0;
inline constexpr double kOhBandHiNm = 313.0;

/// One acquisition. Immutable once constructed.
class Spectrum {
 public:
  Spectrum(WavelengthGrid grid, std::vector<double> intensities, double exposure_s,
           Stage stage);

  const WavelengthGrid& grid() const { return grid_; }
  std::span<const double> intensities() const { return intensities_; }
  double exposure_s() const { return exposure_s_; }
  Stage stage() const { return stage_; }
  std::size_t size() const { return intensities_.size(); }
  double operator[](std::size_t i) const { return intensities_[i]; }

 private:
  WavelengthGrid grid_;
  std::vector<double> intensities_;
  double exposure_s_;
  Stage stage_;
};

/// Short-gated input and long-gated label acquired at one condition.
class SpectrumPair {
 public:
  SpectrumPair(Spectrum low_snr, Spectrum high_snr, GasCondition condition);

  const Spectrum& low_snr() const { return low_snr_; }
  const Spectrum& high_snr() const { return high_snr_; }
  const GasCondition& condition() const { return condition_; }

 private:
  Spectrum low_snr_;
  Spectrum high_snr_;
  GasCondition condition_;
};

/// Mean intensity of pixels whose centers lie in [lo_nm, hi_nm].
double BandMean(const Spectrum& s, double lo_nm, double hi_nm);

Spectrum DarkSubtract(const Spectrum& s, const Spectrum& mean_dark);

/// Divides by the 306-313 nm band mean; requires a dark-subtracted input.
Spectrum OhNormalize(const Spectrum& s);

/// Shorthand for OhNormalize(DarkSubtract(raw, mean_dark)).
Spectrum Preprocess(const Spectrum& raw, const Spectrum& mean_dark);

inline constexpr double kMinAugmentFactor = 0.8;
inline constexpr double kMaxAugmentFactor = 1.2;

/// Scales both members of the pair by one shared factor in [0.8, 1.2].
SpectrumPair AugmentIntensity(const SpectrumPair& pair, double factor);

}  // namespace flamespec

#endif  // FLAMESPEC_SPECTRAL_HPP_
