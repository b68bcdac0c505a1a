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

#include "flamespec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "flamespec/error.hpp"

namespace flamespec {

WavelengthGrid::WavelengthGrid(double start_nm, double end_nm, std::size_t n_pixels)
    : start_nm_(start_nm), end_nm_(end_nm), n_pixels_(n_pixels) {
  if (!(start_nm < end_nm) || !std::isfinite(start_nm) || !std::isfinite(end_nm)) {
    throw Error(ErrorCode::kInvalidGrid, "grid requires start_nm < end_nm");
  }
  if (n_pixels < 2) throw Error(ErrorCode::kInvalidGrid, "grid requires n_pixels >= 2");
}

WavelengthGrid WavelengthGrid::Default() { return WavelengthGrid(250.0, 850.0, 1696); }

std::size_t WavelengthGrid::nearest_pixel(double wavelength_nm) const {
  const double pos = std::round((wavelength_nm - start_nm_) / step_nm());
  if (pos <= 0.0) return 0;
  return std::min(n_pixels_ - 1, std::size_t(pos));
}

bool GasCondition::InEnvelope() const {
  return pressure_bar >= kMinPressureBar && pressure_bar <= kMaxPressureBar &&
         equivalence_ratio >= kMinEquivalenceRatio &&
         equivalence_ratio <= kMaxEquivalenceRatio;
}

std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kRawCounts: return "raw";
    case Stage::kDarkSubtracted: return "dark_subtracted";
    case Stage::kOhNormalized: return "oh_normalized";
  }
  return "raw";
}

Stage StageFromName(std::string_view name) {
  if (name == "raw") return Stage::kRawCounts;
  if (name == "dark_subtracted") return Stage::kDarkSubtracted;
  if (name == "oh_normalized") return Stage::kOhNormalized;
  throw Error(ErrorCode::kFormat, "unknown stage '" + std::string(name) + "'");
}

Spectrum::Spectrum(WavelengthGrid grid, std::vector<double> intensities, double exposure_s,
                   Stage stage)
    : grid_(grid), intensities_(std::move(intensities)), exposure_s_(exposure_s), stage_(stage) {
  if (intensities_.size() != grid_.n_pixels()) {
    throw Error(ErrorCode::kLengthMismatch,
                "spectrum has " + std::to_string(intensities_.size()) + " values for a " +
                    std::to_string(grid_.n_pixels()) + "-pixel grid");
  }
  if (!(exposure_s > 0.0)) throw Error(ErrorCode::kConfigInvalid, "exposure must be > 0");
}

SpectrumPair::SpectrumPair(Spectrum low_snr, Spectrum high_snr, GasCondition condition)
    : low_snr_(std::move(low_snr)), high_snr_(std::move(high_snr)), condition_(condition) {
  if (!(low_snr_.grid() == high_snr_.grid())) {
    throw Error(ErrorCode::kGridMismatch, "pair members must share one grid");
  }
  if (low_snr_.stage() != Stage::kOhNormalized || high_snr_.stage() != Stage::kOhNormalized) {
    throw Error(ErrorCode::kStageMismatch, "pair members must be OH*-normalized");
  }
  if (!(low_snr_.exposure_s() < high_snr_.exposure_s())) {
    throw Error(ErrorCode::kExposureMismatch, "low-SNR exposure must be shorter");
  }
}

double BandMean(const Spectrum& s, double lo_nm, double hi_nm) {
  if (!(lo_nm < hi_nm)) throw Error(ErrorCode::kEmptyBand, "band requires lo < hi");
  const auto& grid = s.grid();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double c = grid.center_nm(i);
    if (c >= lo_nm && c <= hi_nm) {
      sum += s[i];
      ++count;
    }
  }
  if (count == 0) {
    throw Error(ErrorCode::kEmptyBand, "no pixel center in [" + std::to_string(lo_nm) + ", " +
                                           std::to_string(hi_nm) + "] nm");
  }
  return sum / double(count);
}

Spectrum DarkSubtract(const Spectrum& s, const Spectrum& mean_dark) {
  if (s.stage() != Stage::kRawCounts || mean_dark.stage() != Stage::kRawCounts) {
    throw Error(ErrorCode::kStageMismatch, "dark subtraction expects raw counts");
  }
  if (!(s.grid() == mean_dark.grid())) {
    throw Error(ErrorCode::kGridMismatch, "dark frame grid differs from spectrum grid");
  }
  if (s.exposure_s() != mean_dark.exposure_s()) {
    throw Error(ErrorCode::kExposureMismatch, "dark frame exposure differs from spectrum");
  }
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] - mean_dark[i];
  return Spectrum(s.grid(), std::move(out), s.exposure_s(), Stage::kDarkSubtracted);
}

Spectrum OhNormalize(const Spectrum& s) {
  if (s.stage() != Stage::kDarkSubtracted) {
    throw Error(ErrorCode::kStageMismatch, "OH* normalization expects a dark-subtracted spectrum");
  }
  const double band = BandMean(s, kOhBandLoNm, kOhBandHiNm);
  if (!(band > 0.0)) {
    throw Error(ErrorCode::kNonPositiveBand,
                "OH* band mean is " + std::to_string(band) + " (empty or failed acquisition)");
  }
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] / band;
  return Spectrum(s.grid(), std::move(out), s.exposure_s(), Stage::kOhNormalized);
}

Spectrum Preprocess(const Spectrum& raw, const Spectrum& mean_dark) {
  return OhNormalize(DarkSubtract(raw, mean_dark));
}

namespace {

Spectrum Scaled(const Spectrum& s, double factor) {
  std::vector<double> out(s.intensities().begin(), s.intensities().end());
  for (double& v : out) v *= factor;
  return Spectrum(s.grid(), std::move(out), s.exposure_s(), s.stage());
}

}  // namespace

SpectrumPair AugmentIntensity(const SpectrumPair& pair, double factor) {
  if (!(factor >= kMinAugmentFactor && factor <= kMaxAugmentFactor)) {
    throw Error(ErrorCode::kFactorOutOfRange,
                "augmentation factor " + std::to_string(factor) + " outside [0.8, 1.2]");
  }
  return SpectrumPair(Scaled(pair.low_snr(), factor), Scaled(pair.high_snr(), factor),
                      pair.condition());
}

}  // namespace flamespec
