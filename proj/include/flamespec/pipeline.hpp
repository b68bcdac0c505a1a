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

// Calibration -> training -> prediction orchestration behind the CLI verbs.
// Every command is deterministic in (config, seed) and refuses archives
// whose provenance does not match the dataset in use.

#ifndef FLAMESPEC_PIPELINE_HPP_
#define FLAMESPEC_PIPELINE_HPP_

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flamespec/config.hpp"
#include "flamespec/dataset.hpp"
#include "flamespec/dnn.hpp"
#include "flamespec/eval.hpp"
#include "flamespec/kriging.hpp"
#include "flamespec/pod.hpp"

namespace flamespec {

using Logger = std::function<void(std::string_view line)>;

/// Fitted surrogate plus its self-check on the calibration snapshots.
struct Calibration {
  PodModel pod;
  KrigingModel kriging;
  eval::MetricValues pressure_rec;
  eval::MetricValues phi_rec;
};

/// POD on the high-SNR spectra of the train and validation conditions
/// (averaged per condition when configured), kriging on their normalized
/// coefficients.
Calibration FitCalibration(const Config& config, const Dataset& dataset);

/// Known denoiser schemes: "du" and "plain".
const DenoiserSpec& SchemeSpec(const Config& config, std::string_view scheme);

dnn::TrainResult TrainScheme(const Config& config, const Dataset& dataset, const PodModel& pod,
                             std::string_view scheme);

/// Low-SNR spectra grouped per condition, for the given roles.
std::vector<eval::EvalCondition> EvalConditions(const Dataset& dataset,
                                                const std::vector<Role>& roles);

/// Scores raw, plain and du on the test role.
std::vector<eval::SchemeResult> CompareAll(const Dataset& dataset, const Calibration& cal,
                                           const dnn::DenoiserNet& plain,
                                           const dnn::DenoiserNet& du);

/// Holds <dir>/.flamespec.lock for its lifetime; a second holder fails with Io.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

// File names inside a models directory.
inline constexpr const char* kPodArchive = "pod.fsa";
inline constexpr const char* kKrigingArchive = "kriging.fsa";
std::string DenoiserArchiveName(std::string_view scheme);
std::string TrainLogName(std::string_view scheme);

struct PredictOptions {
  std::string scheme = "du";  // raw | plain | du
  bool preprocess = false;    // inputs are raw counts; needs dark_path
  std::filesystem::path dark_path;
  double exposure_s = 0.2;    // recorded on raw inputs
  bool with_variance = true;
};

void CmdGen(const Config& config, const std::filesystem::path& out_dir, const Logger& log);
void CmdCalibrate(const Config& config, const std::filesystem::path& dataset_dir,
                  const std::filesystem::path& models_dir, const Logger& log);
void CmdTrain(const Config& config, const std::filesystem::path& dataset_dir,
              const std::filesystem::path& models_dir, std::string_view scheme, const Logger& log);
/// `input` is a dataset directory (its test low-SNR spectra, with truth
/// columns) or a text file with one spectrum per line.
void CmdPredict(const std::filesystem::path& models_dir, const std::filesystem::path& input,
                const PredictOptions& options, const std::filesystem::path& out_path,
                const Logger& log);
/// `sweep` is empty, "rf" or "exposure".
void CmdEval(const Config& config, const std::filesystem::path& dataset_dir,
             const std::filesystem::path& models_dir, const std::filesystem::path& out_dir,
             std::string_view sweep, const Logger& log);
void CmdReport(const std::filesystem::path& out_dir, const Logger& log);

}  // namespace flamespec

#endif  // FLAMESPEC_PIPELINE_HPP_
