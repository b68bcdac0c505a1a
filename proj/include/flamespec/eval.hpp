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

#ifndef FLAMESPEC_EVAL_HPP_
#define FLAMESPEC_EVAL_HPP_

#include <cstddef>
#include <functional>
#include <string>
#include <tuple>
#include <vector>

#include "flamespec/dnn.hpp"
#include "flamespec/kriging.hpp"
#include "flamespec/pod.hpp"
#include "flamespec/spectral.hpp"

namespace flamespec::eval {

/// Repeated predictions of one property at one condition.
struct ConditionPredictions {
  double truth = 0.0;
  std::vector<double> predictions;
};

struct MetricValues {
  double relative_error = 0.0;  // REC or REP, percent
  double rsd = 0.0;             // percent
};

/// Relative error: 100 * mean over conditions of mean over repeats of
/// |pred - true| / |true|. RSD: 100 * mean over conditions of
/// (sample std of repeats, n - 1 denominator) / |true|.
MetricValues Metrics(const std::vector<ConditionPredictions>& conditions);

/// Mean of dark-subtracted counts at `pixel` over repeats divided by their
/// sample standard deviation. Requires at least 30 raw acquisitions.
double EmpiricalSnr(const std::vector<Spectrum>& raw, std::size_t pixel, const Spectrum& mean_dark);

inline constexpr std::size_t kMinSnrRepeats = 30;

/// OH*-normalized low-SNR spectra of one condition.
struct EvalCondition {
  GasCondition truth;
  std::vector<std::vector<double>> low_snr;
};

/// A prediction pipeline: raw projection when `net` is null, otherwise the
/// spectrum is denoised first.
struct Scheme {
  std::string id;
  const dnn::DenoiserNet* net = nullptr;
};

struct ConditionRow {
  bool is_test = false;
  GasCondition truth;
  std::size_t n = 0;
  double pressure_mean = 0.0;
  double pressure_std = 0.0;
  double phi_mean = 0.0;
  double phi_std = 0.0;
};

struct SchemeResult {
  std::string scheme;
  MetricValues pressure_calibration;  // REC from calibration conditions
  MetricValues phi_calibration;
  MetricValues pressure_prediction;   // REP, RSD from test conditions
  MetricValues phi_prediction;
  std::vector<ConditionRow> rows;
};

/// Runs one spectrum through a scheme and the POD/kriging surrogate.
Eigen::Vector2d PredictCondition(std::span<const double> spectrum, const Scheme& scheme,
                                 const PodModel& pod, const KrigingModel& kriging);

/// Evaluates every scheme on calibration (REC) and test (REP, RSD)
/// conditions. Models are inputs; nothing is fitted here.
std::vector<SchemeResult> CompareSchemes(const std::vector<EvalCondition>& calibration,
                                         const std::vector<EvalCondition>& test,
                                         const PodModel& pod, const KrigingModel& kriging,
                                         const std::vector<Scheme>& schemes);

/// Everything needed to train and score one extra denoiser.
struct SweepInputs {
  std::vector<dnn::ConditionSamples> train;
  std::vector<dnn::ConditionSamples> validation;
  std::vector<EvalCondition> calibration;
  std::vector<EvalCondition> test;
  const PodModel* pod = nullptr;
  const KrigingModel* kriging = nullptr;
  dnn::TrainConfig train_config;
};

struct RfRow {
  std::size_t receptive_field = 0;
  std::size_t empirical_receptive_field = 0;
  std::size_t param_count = 0;
  dnn::NetworkConfig config;
  MetricValues pressure;
  MetricValues phi;
};

/// Trains one POD-loss net per config and reports test REP/RSD; rows are
/// sorted by receptive field.
std::vector<RfRow> RfSweep(const std::vector<dnn::NetworkConfig>& configs,
                           const SweepInputs& inputs);

struct ExposureRow {
  double exposure_s = 0.0;
  double snr = 0.0;
  // accuracy = 100 - REP, per scheme id in the order given
  std::vector<std::string> schemes;
  std::vector<double> pressure_accuracy;
  std::vector<double> phi_accuracy;
};

struct ExposureSweepHooks {
  /// Regenerated inputs for a given low-SNR exposure.
  std::function<SweepInputs(double exposure_s)> regenerate;
  /// Monte-Carlo SNR of the reference pixel for a given exposure.
  std::function<double(double exposure_s)> snr;
  /// Networks to evaluate: (scheme id, config, alpha). Trained per exposure
  /// unless `reuse` holds pre-trained nets in the same order.
  std::vector<std::tuple<std::string, dnn::NetworkConfig, double>> networks;
  std::vector<const dnn::DenoiserNet*> reuse;
};

std::vector<ExposureRow> ExposureSweep(const std::vector<double>& exposures,
                                       const ExposureSweepHooks& hooks);

}  // namespace flamespec::eval

#endif  // FLAMESPEC_EVAL_HPP_
