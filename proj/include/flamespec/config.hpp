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

#ifndef FLAMESPEC_CONFIG_HPP_
#define FLAMESPEC_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flamespec/dnn.hpp"
#include "flamespec/kriging.hpp"
#include "flamespec/pod.hpp"
#include "flamespec/spectral.hpp"
#include "flamespec/synthgen.hpp"

namespace flamespec {

struct GridConfig {
  double start_nm = 250.0;
  double end_nm = 850.0;
  std::size_t n_pixels = 424;

  WavelengthGrid Make() const { return WavelengthGrid(start_nm, end_nm, n_pixels); }
};

struct DesignConfig {
  std::size_t train_pressure_levels = 5;
  std::size_t train_phi_levels = 5;
  std::size_t test_samples = 9;
  double pressure_lo = kMinPressureBar;
  double pressure_hi = kMaxPressureBar;
  double phi_lo = kMinEquivalenceRatio;
  double phi_hi = kMaxEquivalenceRatio;
  double validation_fraction = 0.1;
};

struct AcquisitionConfig {
  std::size_t n_ls = 20;
  std::size_t n_hs = 2;
  std::size_t n_dark = 100;  // frames averaged into each mean dark
  double tau_ls = 0.2;
  double tau_hs = 2.0;
};

struct CalibrationConfig {
  std::size_t pod_rank = PodModel::kDefaultRank;
  /// Average the high-SNR repeats of each condition into one snapshot
  /// instead of projecting each repeat as its own row.
  bool average_hs = false;
  KrigingOptions kriging;
};

/// Architecture of one denoiser scheme; input width comes from the grid.
struct DenoiserSpec {
  std::size_t n_layers = 3;
  std::size_t n_channels = 8;
  std::size_t kernel_size = 7;
  std::size_t downsample = 4;
  double alpha = 0.1;

  dnn::NetworkConfig Network(std::size_t width) const {
    return {n_layers, n_channels, kernel_size, downsample, width};
  }
};

struct EvalConfig {
  std::vector<double> exposures{0.05, 0.2, 0.4};
  /// Architectures for the receptive-field sweep; all use the du alpha.
  std::vector<DenoiserSpec> rf_configs;
  bool retrain = true;  // exposure sweep retrains per exposure when set
  std::size_t snr_repeats = 1000;
};

struct Config {
  std::uint64_t seed = 1;
  GridConfig grid;
  DesignConfig design;
  AcquisitionConfig acquisition;
  CcdConfig ccd;
  int emitter_version = EmitterModel::kDefaultVersion;
  /// Custom band table; replaces the versioned default when set.
  std::optional<EmitterModel> emitter;
  CalibrationConfig calibration;
  DenoiserSpec du;
  DenoiserSpec plain{3, 8, 7, 1, 0.0};
  dnn::TrainConfig train;
  EvalConfig eval;

  /// 25 training + 9 test conditions on a 424-pixel grid.
  static Config DeskScale();
  /// 50 training + 30 test conditions on the full 1696-pixel grid.
  static Config FullScale();

  void Validate() const;
  EmitterModel Emitter() const;
};

/// Parses a JSON document over DeskScale() defaults. Unknown keys and type
/// errors are fatal (ConfigInvalid) and name the offending key path.
Config ParseConfig(std::string_view json_text);
Config LoadConfig(const std::filesystem::path& path);

/// Canonical JSON form; ParseConfig(DumpConfig(c)) reproduces c.
std::string DumpConfig(const Config& config);

/// Digest of the settings that determine generated spectra.
std::string GeneratorHash(const Config& config);

}  // namespace flamespec

#endif  // FLAMESPEC_CONFIG_HPP_
