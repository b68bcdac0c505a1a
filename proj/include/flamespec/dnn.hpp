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

// 1D denoising network: pixel-unshuffle down-sampling, a plain
// Conv/BN/ReLU stack, pixel-shuffle up-sampling, the blended MSE + POD
// coefficient loss, hand-written reverse-mode gradients, ADAM and the
// warmup cosine-annealing schedule.
//
// Activations are stored batch-major: element (b, c, l) of a B x C x L
// tensor lives at (b * C + c) * L + l.

#ifndef FLAMESPEC_DNN_HPP_
#define FLAMESPEC_DNN_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flamespec/pod.hpp"
#include "flamespec/spectral.hpp"

namespace flamespec::dnn {

struct NetworkConfig {
  std::size_t n_layers = 7;
  std::size_t n_channels = 32;
  std::size_t kernel_size = 15;
  std::size_t downsample = 16;
  std::size_t input_width = 1696;

  /// DU + CNN baseline.
  static NetworkConfig DuBaseline() { return {}; }
  /// Plain CNN baseline (no down-sampling).
  static NetworkConfig PlainBaseline() { return {7, 32, 15, 1, 1696}; }

  void Validate() const;
  /// Length of each sub-signal, ceil(W / N_d).
  std::size_t sub_length() const { return (input_width + downsample - 1) / downsample; }
  std::size_t padded_width() const { return sub_length() * downsample; }

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// N_d * (N_l * (N_k - 1) + 1).
std::size_t ReceptiveField(const NetworkConfig& cfg);

/// Convolution weights and biases only:
/// (N_l - 2)(N_c^2 N_k + N_c) + 2 N_d N_c N_k + (N_c + N_d).
std::size_t ParamCount(const NetworkConfig& cfg);

/// Batch-norm scale and shift parameters, 2 N_c (N_l - 2).
std::size_t BatchNormParamCount(const NetworkConfig& cfg);

/// Interleaved split: sub-signal j holds pixels j, j + N_d, ... with a zero
/// tail when W is not a multiple of N_d. Output is N_d x ceil(W / N_d).
std::vector<double> Downsample(std::span<const double> x, std::size_t n_d);

/// Exact inverse of Downsample; crops the padded tail back to `width`.
std::vector<double> Upsample(std::span<const double> subs, std::size_t n_d, std::size_t width);

/// "Same" zero-padded stride-1 cross-correlation of one C_in x L signal.
/// weights are C_out x C_in x K, bias has C_out entries.
std::vector<double> Conv1d(std::span<const double> x, std::size_t c_in, std::size_t length,
                           std::span<const double> weights, std::span<const double> bias,
                           std::size_t c_out, std::size_t kernel);

struct ConvLayer {
  std::size_t c_in = 0;
  std::size_t c_out = 0;
  std::size_t kernel = 0;
  std::vector<double> weight;
  std::vector<double> bias;
};

struct BatchNormLayer {
  std::size_t channels = 0;
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  double epsilon = 1e-5;
};

enum class Mode { kTraining, kInference };

/// Gradients mirroring the trainable parameters of a DenoiserNet.
struct Gradients {
  std::vector<std::vector<double>> conv_weight;
  std::vector<std::vector<double>> conv_bias;
  std::vector<std::vector<double>> bn_gamma;
  std::vector<std::vector<double>> bn_beta;
};

/// Activations recorded by a training-mode forward pass.
struct Tape {
  std::size_t batch = 0;
  std::vector<std::vector<double>> conv_inputs;   // input to conv layer i
  std::vector<std::vector<double>> bn_normalized; // x-hat of middle layer i
  std::vector<std::vector<double>> bn_inv_std;    // per-channel 1/sqrt(var + eps)
  std::vector<std::vector<double>> relu_inputs;   // pre-activation of ReLU i
};

class DenoiserNet {
 public:
  /// He-normal conv weights, zero biases, unit BN scale, zero shift.
  DenoiserNet(const NetworkConfig& config, std::uint64_t seed);
  DenoiserNet(const NetworkConfig& config, std::vector<ConvLayer> convs,
              std::vector<BatchNormLayer> norms);

  const NetworkConfig& config() const { return config_; }
  Mode mode() const { return mode_; }
  void set_mode(Mode mode) { mode_ = mode; }

  std::vector<ConvLayer>& convs() { return convs_; }
  const std::vector<ConvLayer>& convs() const { return convs_; }
  std::vector<BatchNormLayer>& norms() { return norms_; }
  const std::vector<BatchNormLayer>& norms() const { return norms_; }

  /// Runs a batch of `batch` spectra (batch x W). In training mode BN uses
  /// batch statistics, updates running statistics, and records `tape`.
  std::vector<double> Forward(std::span<const double> x, std::size_t batch, Tape* tape = nullptr);

  /// Inference on one spectrum. Requires inference mode.
  std::vector<double> Denoise(std::span<const double> x) const;

  /// Reverse pass of a recorded batch given dLoss/dOutput (batch x W).
  Gradients Backward(const Tape& tape, std::span<const double> grad_output) const;

  Gradients ZeroGradients() const;
  /// Flat views of all trainable parameters in a fixed order
  /// (conv weights and biases per layer, then BN gamma and beta per layer).
  std::vector<std::span<double>> Parameters();
  static std::vector<std::span<const double>> Flatten(const Gradients& g);

  /// Total number of trainable conv parameters actually allocated.
  std::size_t CountConvParameters() const;

 private:
  std::vector<double> Run(std::span<const double> x, std::size_t batch, Mode mode, Tape* tape,
                          std::vector<BatchNormLayer>* norms) const;

  NetworkConfig config_;
  Mode mode_ = Mode::kInference;
  std::vector<ConvLayer> convs_;
  std::vector<BatchNormLayer> norms_;
};

/// Frozen POD projection used by the loss: normalized coefficient
/// differences (c_hat - c) * scale, where scale = 1 / (max - min).
struct PodLossTerm {
  Eigen::MatrixXd bases;  // k x W
  Eigen::VectorXd scale;  // k
  static PodLossTerm From(const PodModel& pod);
};

struct LossValue {
  double value = 0.0;
  std::vector<double> grad;  // dL/d y_hat, batch x W
};

/// Mean over the batch of (1 - alpha) ||y_hat - y||^2 + alpha ||POD(y_hat) - POD(y)||^2.
LossValue CompositeLoss(std::span<const double> y_hat, std::span<const double> y,
                        std::size_t batch, const PodLossTerm& pod, double alpha);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::uint64_t step = 0;

  static AdamState For(const std::vector<std::span<double>>& params);
};

void AdamStep(AdamState& state, const std::vector<std::span<double>>& params,
              const std::vector<std::span<const double>>& grads, double lr,
              const AdamConfig& cfg = {});

struct SchedulerConfig {
  double first_cycle_steps = 50;  // T_0
  double cycle_mult = 1;          // T_mult
  double max_lr = 0.005;          // eta_max
  double warmup_steps = 10;       // T_up
  double gamma = 0.1;

  void Validate() const;
};

/// Linear warmup to the cycle peak max_lr * gamma^cycle, then cosine decay to 0.
double LrSchedule(std::size_t step, const SchedulerConfig& cfg);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  AdamConfig adam;
  SchedulerConfig scheduler;
  double alpha = 0.1;
  double validation_fraction = 0.1;
  double augment_lo = kMinAugmentFactor;
  double augment_hi = kMaxAugmentFactor;
  std::uint64_t seed = 0;

  void Validate() const;
};

/// All OH*-normalized spectra of one gas condition; training pairs are the
/// full low-SNR x high-SNR cross product.
struct ConditionSamples {
  GasCondition condition;
  std::vector<std::vector<double>> low_snr;
  std::vector<std::vector<double>> high_snr;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::uint64_t step = 0;  // optimizer steps taken at the end of the epoch
  double lr = 0.0;
  double train_loss = 0.0;
  double validation_loss = 0.0;  // NaN when no validation conditions exist
};

struct TrainResult {
  DenoiserNet net;
  AdamState optimizer;
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;
};

/// Indices of conditions drawn for validation: max(1, round(fraction * n))
/// whole conditions chosen by a seeded shuffle (none when n < 2).
std::vector<std::size_t> ValidationConditions(std::size_t n_conditions, double fraction,
                                              std::uint64_t seed);

/// Trains on `train` pairs, tracks loss on `validation` (held out by
/// condition), and returns the network at the best validation epoch
/// (the last epoch when `validation` is empty), in inference mode.
TrainResult Train(const std::vector<ConditionSamples>& train,
                  const std::vector<ConditionSamples>& validation, const NetworkConfig& net_cfg,
                  const TrainConfig& train_cfg, const PodModel& pod);

/// Mean per-pair loss over a condition set, in inference mode.
double EvaluateLoss(const DenoiserNet& net, const std::vector<ConditionSamples>& data,
                    const PodLossTerm& pod, double alpha);

/// Footprint probe on an inference-mode net: perturbs the input pixel at the
/// central sub-signal position and counts output pixels that move by more
/// than 1e-12. Runs on the padded width, so saturation is at padded W.
std::size_t EmpiricalReceptiveField(const DenoiserNet& net);

/// Net with strictly positive random weights and biases, so every ReLU stays
/// active on a positive input and no path of the footprint is masked.
DenoiserNet ProbeNet(const NetworkConfig& cfg, std::uint64_t seed = 7);

}  // namespace flamespec::dnn

#endif  // FLAMESPEC_DNN_HPP_
