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

// On-disk synthetic dataset: a JSON manifest plus one flat blob of
// little-endian float32 spectra.

#ifndef FLAMESPEC_DATASET_HPP_
#define FLAMESPEC_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "flamespec/config.hpp"
#include "flamespec/dnn.hpp"
#include "flamespec/spectral.hpp"

namespace flamespec {

enum class Role { kTrain, kValidation, kTest };
enum class SnrClass { kLow, kHigh };

std::string_view RoleName(Role role);
std::string_view SnrClassName(SnrClass snr);

struct DatasetRecord {
  std::size_t condition_index = 0;
  GasCondition condition;
  Role role = Role::kTrain;
  SnrClass snr = SnrClass::kLow;
  double exposure_s = 0.0;
  Stage stage = Stage::kOhNormalized;
  std::uint64_t offset = 0;  // bytes into the blob
  std::uint64_t length = 0;  // bytes, always 4 * n_pixels
  std::uint64_t seed = 0;
};

/// Mean of `n_frames` dark acquisitions at one exposure, stored raw.
struct DarkRecord {
  double exposure_s = 0.0;
  std::size_t n_frames = 0;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  std::uint64_t seed = 0;
};

struct DatasetManifest {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  GridConfig grid;
  std::string generator_hash;
  std::vector<DatasetRecord> records;
  std::vector<DarkRecord> darks;

  /// Offsets in bounds and non-overlapping, lengths match the grid, and no
  /// condition index carries two roles.
  void Validate(std::uint64_t blob_bytes) const;
};

class Dataset {
 public:
  /// Generates every acquisition described by `config`, deterministic in
  /// config.seed. Spectra are stored OH*-normalized.
  static Dataset Build(const Config& config);

  static Dataset Load(const std::filesystem::path& dir);
  /// Writes manifest.json and spectra.f32 into `dir` (created if needed).
  void Save(const std::filesystem::path& dir) const;

  const DatasetManifest& manifest() const { return manifest_; }
  WavelengthGrid grid() const { return manifest_.grid.Make(); }
  std::vector<double> Values(const DatasetRecord& record) const;
  Spectrum MeanDark(double exposure_s) const;

  /// LS and HS spectra of every condition in `role`, in condition order.
  std::vector<dnn::ConditionSamples> Samples(Role role) const;
  /// Per-condition LS x HS product summed over all roles.
  std::size_t PairCount() const;
  /// The same product restricted to train and validation conditions.
  std::size_t TrainingPairCount() const;
  std::size_t ConditionCount() const;

  /// FNV-1a over the serialized manifest and the blob.
  std::string Hash() const;
  std::string ManifestText() const;
  std::size_t BlobBytes() const { return blob_.size() * sizeof(float); }

 private:
  std::vector<double> Slice(std::uint64_t offset, std::uint64_t length) const;

  DatasetManifest manifest_;
  std::vector<float> blob_;
};

/// Default file names inside a dataset directory.
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kBlobFile = "spectra.f32";

}  // namespace flamespec

#endif  // FLAMESPEC_DATASET_HPP_
