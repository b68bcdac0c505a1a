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

#include "flamespec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "flamespec/error.hpp"

namespace flamespec::eval {

namespace {

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double SampleStd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size() - 1));
}

}  // namespace

MetricValues Metrics(const std::vector<ConditionPredictions>& conditions) {
  if (conditions.empty()) throw Error(ErrorCode::kEmptyInput, "no conditions to score");
  double err_sum = 0.0;
  double rsd_sum = 0.0;
  for (const auto& c : conditions) {
    if (c.predictions.empty()) {
      throw Error(ErrorCode::kEmptyInput, "condition without predictions");
    }
    const double denom = std::abs(c.truth);
    double e = 0.0;
    for (double p : c.predictions) e += std::abs(p - c.truth) / denom;
    err_sum += e / double(c.predictions.size());
    rsd_sum += SampleStd(c.predictions) / denom;
  }
  const double n = double(conditions.size());
  return {100.0 * err_sum / n, 100.0 * rsd_sum / n};
}

double EmpiricalSnr(const std::vector<Spectrum>& raw, std::size_t pixel, const Spectrum& mean_dark) {
  if (raw.size() < kMinSnrRepeats) {
    throw Error(ErrorCode::kEmptyInput, "empirical SNR needs at least 30 repeats, got " +
                                            std::to_string(raw.size()));
  }
  std::vector<double> values;
  values.reserve(raw.size());
  for (const auto& s : raw) values.push_back(DarkSubtract(s, mean_dark)[pixel]);
  const double sd = SampleStd(values);
  if (!(sd > 0.0)) throw Error(ErrorCode::kNotStochastic, "repeats have zero variance");
  return Mean(values) / sd;
}

Eigen::Vector2d PredictCondition(std::span<const double> spectrum, const Scheme& scheme,
                                 const PodModel& pod, const KrigingModel& kriging) {
  Eigen::VectorXd coeffs;
  if (scheme.net) {
    const auto denoised = scheme.net->Denoise(spectrum);
    coeffs = pod.NormalizedCoeffs(denoised);
  } else {
    coeffs = pod.NormalizedCoeffs(spectrum);
  }
  const auto p = kriging.Predict(coeffs);
  return {p.mean(0), p.mean(1)};
}

namespace {

struct Scored {
  std::vector<ConditionPredictions> pressure;
  std::vector<ConditionPredictions> phi;
  std::vector<ConditionRow> rows;
};

Scored Score(const std::vector<EvalCondition>& conditions, bool is_test, const Scheme& scheme,
             const PodModel& pod, const KrigingModel& kriging) {
  Scored out;
  for (const auto& cond : conditions) {
    ConditionPredictions p{cond.truth.pressure_bar, {}};
    ConditionPredictions f{cond.truth.equivalence_ratio, {}};
    for (const auto& s : cond.low_snr) {
      const auto pred = PredictCondition(s, scheme, pod, kriging);
      p.predictions.push_back(pred(0));
      f.predictions.push_back(pred(1));
    }
    if (p.predictions.empty()) {
      throw Error(ErrorCode::kEmptyInput, "condition without low-SNR spectra");
    }
    ConditionRow row;
    row.is_test = is_test;
    row.truth = cond.truth;
    row.n = p.predictions.size();
    row.pressure_mean = Mean(p.predictions);
    row.pressure_std = SampleStd(p.predictions);
    row.phi_mean = Mean(f.predictions);
    row.phi_std = SampleStd(f.predictions);
    out.rows.push_back(row);
    out.pressure.push_back(std::move(p));
    out.phi.push_back(std::move(f));
  }
  return out;
}

}  // namespace

std::vector<SchemeResult> CompareSchemes(const std::vector<EvalCondition>& calibration,
                                         const std::vector<EvalCondition>& test,
                                         const PodModel& pod, const KrigingModel& kriging,
                                         const std::vector<Scheme>& schemes) {
  if (calibration.empty() || test.empty()) {
    throw Error(ErrorCode::kEmptyInput, "need calibration and test conditions");
  }
  std::vector<SchemeResult> results;
  for (const auto& scheme : schemes) {
    const Scored cal = Score(calibration, false, scheme, pod, kriging);
    const Scored tst = Score(test, true, scheme, pod, kriging);
    SchemeResult r;
    r.scheme = scheme.id;
    r.pressure_calibration = Metrics(cal.pressure);
    r.phi_calibration = Metrics(cal.phi);
    r.pressure_prediction = Metrics(tst.pressure);
    r.phi_prediction = Metrics(tst.phi);
    r.rows = cal.rows;
    r.rows.insert(r.rows.end(), tst.rows.begin(), tst.rows.end());
    results.push_back(std::move(r));
  }
  return results;
}

std::vector<RfRow> RfSweep(const std::vector<dnn::NetworkConfig>& configs,
                           const SweepInputs& inputs) {
  if (!inputs.pod || !inputs.kriging) {
    throw Error(ErrorCode::kEmptyInput, "receptive-field sweep needs fitted POD and kriging");
  }
  std::vector<RfRow> rows;
  for (const auto& cfg : configs) {
    const auto trained =
        dnn::Train(inputs.train, inputs.validation, cfg, inputs.train_config, *inputs.pod);
    const Scheme scheme{"du", &trained.net};
    const Scored tst = Score(inputs.test, true, scheme, *inputs.pod, *inputs.kriging);
    RfRow row;
    row.config = cfg;
    row.receptive_field = dnn::ReceptiveField(cfg);
    row.empirical_receptive_field = dnn::EmpiricalReceptiveField(dnn::ProbeNet(cfg));
    row.param_count = dnn::ParamCount(cfg);
    row.pressure = Metrics(tst.pressure);
    row.phi = Metrics(tst.phi);
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const RfRow& a, const RfRow& b) {
    return a.receptive_field < b.receptive_field;
  });
  return rows;
}

std::vector<ExposureRow> ExposureSweep(const std::vector<double>& exposures,
                                       const ExposureSweepHooks& hooks) {
  if (exposures.empty()) throw Error(ErrorCode::kEmptyInput, "no exposures to sweep");
  if (!hooks.regenerate || !hooks.snr) {
    throw Error(ErrorCode::kEmptyInput, "exposure sweep hooks are not set");
  }
  if (!hooks.reuse.empty() && hooks.reuse.size() != hooks.networks.size()) {
    throw Error(ErrorCode::kEmptyInput, "reuse list must match the network list");
  }
  std::vector<ExposureRow> rows;
  for (double tau : exposures) {
    if (!(tau > 0.0)) throw Error(ErrorCode::kConfigInvalid, "exposure must be > 0");
    const SweepInputs in = hooks.regenerate(tau);
    std::vector<dnn::TrainResult> trained;
    std::vector<Scheme> schemes{{"raw", nullptr}};
    for (std::size_t i = 0; i < hooks.networks.size(); ++i) {
      const auto& [id, cfg, alpha] = hooks.networks[i];
      if (!hooks.reuse.empty()) {
        schemes.push_back({id, hooks.reuse[i]});
        continue;
      }
      dnn::TrainConfig tc = in.train_config;
      tc.alpha = alpha;
      trained.push_back(dnn::Train(in.train, in.validation, cfg, tc, *in.pod));
    }
    for (std::size_t i = 0; i < trained.size(); ++i) {
      schemes.push_back({std::get<0>(hooks.networks[i]), &trained[i].net});
    }
    ExposureRow row;
    row.exposure_s = tau;
    row.snr = hooks.snr(tau);
    for (const auto& scheme : schemes) {
      const Scored tst = Score(in.test, true, scheme, *in.pod, *in.kriging);
      row.schemes.push_back(scheme.id);
      row.pressure_accuracy.push_back(100.0 - Metrics(tst.pressure).relative_error);
      row.phi_accuracy.push_back(100.0 - Metrics(tst.phi).relative_error);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace flamespec::eval
