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

// Self-describing model archive: magic "FSARCHV1", a little-endian u64
// header length, a JSON header (kind, config, provenance, array table)
// padded to 8 bytes, then the float64 arrays back to back.

#ifndef FLAMESPEC_ARCHIVE_HPP_
#define FLAMESPEC_ARCHIVE_HPP_

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

namespace flamespec {

struct ArchiveArray {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> data;
};

struct Provenance {
  std::string dataset_hash;
  std::uint64_t seed = 0;
  std::string tool_version;
};

class ModelArchive {
 public:
  ModelArchive() = default;
  ModelArchive(std::string kind, std::string config_json, Provenance provenance)
      : kind_(std::move(kind)), config_json_(std::move(config_json)),
        provenance_(std::move(provenance)) {}

  const std::string& kind() const { return kind_; }
  /// Compact JSON object text.
  const std::string& config_json() const { return config_json_; }
  const Provenance& provenance() const { return provenance_; }
  const std::vector<ArchiveArray>& arrays() const { return arrays_; }

  void Add(std::string name, std::vector<std::uint64_t> shape, std::vector<double> data);
  /// Throws Format when the array is missing or its element count is off.
  const ArchiveArray& Get(std::string_view name, std::size_t expected_count) const;

  std::vector<unsigned char> Serialize() const;
  static ModelArchive Parse(const std::vector<unsigned char>& bytes);
  void Save(const std::filesystem::path& path) const;
  static ModelArchive Load(const std::filesystem::path& path);

  /// Throws ProvenanceMismatch unless kind and dataset hash match.
  void Expect(std::string_view kind, std::string_view dataset_hash) const;

 private:
  std::string kind_;
  std::string config_json_ = "{}";
  Provenance provenance_;
  std::vector<ArchiveArray> arrays_;
};

inline constexpr std::string_view kPodKind = "pod";
inline constexpr std::string_view kKrigingKind = "kriging";
inline constexpr std::string_view kDenoiserKind = "denoiser";

/// `grid`, when given, is recorded so raw inputs can be preprocessed later.
ModelArchive PodToArchive(const PodModel& pod, const Provenance& provenance,
                          const WavelengthGrid* grid = nullptr);
PodModel PodFromArchive(const ModelArchive& archive);
/// The recorded grid, or nullopt for archives written without one.
std::optional<WavelengthGrid> PodGridFromArchive(const ModelArchive& archive);

ModelArchive KrigingToArchive(const KrigingModel& model, const Provenance& provenance);
KrigingModel KrigingFromArchive(const ModelArchive& archive);

/// `scheme` and `alpha` are recorded in the config document.
ModelArchive DenoiserToArchive(const dnn::DenoiserNet& net, std::string_view scheme, double alpha,
                               const Provenance& provenance);
/// Full checkpoint: the network plus Adam moments, the optimizer step
/// ("optimizer_step" in the config) and the per-epoch log as array
/// "train_log" with columns epoch, step, lr, train_loss, validation_loss.
ModelArchive DenoiserToArchive(const dnn::TrainResult& result, std::string_view scheme,
                               double alpha, const Provenance& provenance);
dnn::DenoiserNet DenoiserFromArchive(const ModelArchive& archive);

}  // namespace flamespec

#endif  // FLAMESPEC_ARCHIVE_HPP_
