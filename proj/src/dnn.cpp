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

#include "flamespec/dnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "flamespec/error.hpp"
#include "flamespec/synthgen.hpp"

namespace flamespec::dnn {

void NetworkConfig::Validate() const {
  if (n_layers < 2) throw Error(ErrorCode::kConfigInvalid, "network.n_layers must be >= 2");
  if (n_channels < 1) throw Error(ErrorCode::kConfigInvalid, "network.n_channels must be >= 1");
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw Error(ErrorCode::kConfigInvalid, "network.kernel_size must be odd and >= 1");
  }
  if (downsample < 1) throw Error(ErrorCode::kConfigInvalid, "network.downsample must be >= 1");
  if (input_width < 1) throw Error(ErrorCode::kConfigInvalid, "network.input_width must be >= 1");
}

std::size_t ReceptiveField(const NetworkConfig& cfg) {
  return cfg.downsample * (cfg.n_layers * (cfg.kernel_size - 1) + 1);
}

std::size_t ParamCount(const NetworkConfig& cfg) {
  const std::size_t nc = cfg.n_channels;
  const std::size_t nk = cfg.kernel_size;
  const std::size_t nd = cfg.downsample;
  return (cfg.n_layers - 2) * (nc * nc * nk + nc) + 2 * nd * nc * nk + (nc + nd);
}

std::size_t BatchNormParamCount(const NetworkConfig& cfg) {
  return 2 * cfg.n_channels * (cfg.n_layers - 2);
}

std::vector<double> Downsample(std::span<const double> x, std::size_t n_d) {
  const std::size_t sub = (x.size() + n_d - 1) / n_d;
  std::vector<double> out(n_d * sub, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) out[(i % n_d) * sub + i / n_d] = x[i];
  return out;
}

std::vector<double> Upsample(std::span<const double> subs, std::size_t n_d, std::size_t width) {
  const std::size_t sub = (width + n_d - 1) / n_d;
  if (n_d == 0 || subs.size() != n_d * sub) {
    throw Error(ErrorCode::kShapeMismatch,
                "expected " + std::to_string(n_d) + " sub-signals of length " +
                    std::to_string(sub) + ", got " + std::to_string(subs.size()) + " values");
  }
  std::vector<double> out(width);
  for (std::size_t i = 0; i < width; ++i) out[i] = subs[(i % n_d) * sub + i / n_d];
  return out;
}

namespace {

// y[o, :] += sum_c sum_t w[o, c, t] * x[c, : + t - pad] for one sample.
void ConvForwardSample(const double* x, std::size_t c_in, std::size_t length, const double* w,
                       const double* b, std::size_t c_out, std::size_t kernel, double* y) {
  const auto pad = std::ptrdiff_t(kernel / 2);
  const auto len = std::ptrdiff_t(length);
  for (std::size_t o = 0; o < c_out; ++o) {
    double* yo = y + o * length;
    std::fill(yo, yo + length, b[o]);
    for (std::size_t c = 0; c < c_in; ++c) {
      const double* xc = x + c * length;
      const double* wk = w + (o * c_in + c) * kernel;
      for (std::size_t t = 0; t < kernel; ++t) {
        const std::ptrdiff_t shift = std::ptrdiff_t(t) - pad;
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(len, len - shift);
        const double wv = wk[t];
        for (std::ptrdiff_t l = lo; l < hi; ++l) yo[l] += wv * xc[l + shift];
      }
    }
  }
}

void ConvBackwardSample(const double* x, std::size_t c_in, std::size_t length, const double* w,
                        std::size_t c_out, std::size_t kernel, const double* dy, double* dw,
                        double* db, double* dx) {
  const auto pad = std::ptrdiff_t(kernel / 2);
  const auto len = std::ptrdiff_t(length);
  for (std::size_t o = 0; o < c_out; ++o) {
    const double* dyo = dy + o * length;
    double bsum = 0.0;
    for (std::size_t l = 0; l < length; ++l) bsum += dyo[l];
    db[o] += bsum;
    for (std::size_t c = 0; c < c_in; ++c) {
      const double* xc = x + c * length;
      const double* wk = w + (o * c_in + c) * kernel;
      double* dwk = dw + (o * c_in + c) * kernel;
      double* dxc = dx ? dx + c * length : nullptr;
      for (std::size_t t = 0; t < kernel; ++t) {
        const std::ptrdiff_t shift = std::ptrdiff_t(t) - pad;
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(len, len - shift);
        double acc = 0.0;
        for (std::ptrdiff_t l = lo; l < hi; ++l) acc += dyo[l] * xc[l + shift];
        dwk[t] += acc;
        if (dxc) {
          const double wv = wk[t];
          for (std::ptrdiff_t l = lo; l < hi; ++l) dxc[l + shift] += wv * dyo[l];
        }
      }
    }
  }
}

}  // namespace

std::vector<double> Conv1d(std::span<const double> x, std::size_t c_in, std::size_t length,
                           std::span<const double> weights, std::span<const double> bias,
                           std::size_t c_out, std::size_t kernel) {
  if (kernel % 2 == 0 || x.size() != c_in * length || weights.size() != c_out * c_in * kernel ||
      bias.size() != c_out) {
    throw Error(ErrorCode::kShapeMismatch, "conv1d operand shapes are inconsistent");
  }
  std::vector<double> y(c_out * length);
  ConvForwardSample(x.data(), c_in, length, weights.data(), bias.data(), c_out, kernel, y.data());
  return y;
}

namespace {

ConvLayer MakeConv(std::size_t c_in, std::size_t c_out, std::size_t kernel) {
  ConvLayer layer;
  layer.c_in = c_in;
  layer.c_out = c_out;
  layer.kernel = kernel;
  layer.weight.assign(c_out * c_in * kernel, 0.0);
  layer.bias.assign(c_out, 0.0);
  return layer;
}

BatchNormLayer MakeNorm(std::size_t channels) {
  BatchNormLayer bn;
  bn.channels = channels;
  bn.gamma.assign(channels, 1.0);
  bn.beta.assign(channels, 0.0);
  bn.running_mean.assign(channels, 0.0);
  bn.running_var.assign(channels, 1.0);
  return bn;
}

std::vector<ConvLayer> MakeConvStack(const NetworkConfig& cfg) {
  std::vector<ConvLayer> convs;
  for (std::size_t i = 0; i < cfg.n_layers; ++i) {
    const std::size_t c_in = i == 0 ? cfg.downsample : cfg.n_channels;
    const std::size_t c_out = i + 1 == cfg.n_layers ? cfg.downsample : cfg.n_channels;
    convs.push_back(MakeConv(c_in, c_out, cfg.kernel_size));
  }
  return convs;
}

}  // namespace

DenoiserNet::DenoiserNet(const NetworkConfig& config, std::uint64_t seed) : config_(config) {
  config_.Validate();
  convs_ = MakeConvStack(config_);
  std::mt19937_64 rng(seed);
  for (auto& conv : convs_) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / double(conv.c_in * conv.kernel)));
    for (double& w : conv.weight) w = dist(rng);
  }
  for (std::size_t i = 1; i + 1 < config_.n_layers; ++i) norms_.push_back(MakeNorm(config_.n_channels));
}

DenoiserNet::DenoiserNet(const NetworkConfig& config, std::vector<ConvLayer> convs,
                         std::vector<BatchNormLayer> norms)
    : config_(config), convs_(std::move(convs)), norms_(std::move(norms)) {
  config_.Validate();
  const auto expected = MakeConvStack(config_);
  if (convs_.size() != expected.size() || norms_.size() != config_.n_layers - 2) {
    throw Error(ErrorCode::kShapeMismatch, "layer count does not match the network config");
  }
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    const auto& c = convs_[i];
    const auto& e = expected[i];
    if (c.c_in != e.c_in || c.c_out != e.c_out || c.kernel != e.kernel ||
        c.weight.size() != e.weight.size() || c.bias.size() != e.bias.size()) {
      throw Error(ErrorCode::kShapeMismatch, "conv layer " + std::to_string(i) +
                                                 " does not chain with its neighbours");
    }
  }
  for (const auto& bn : norms_) {
    if (bn.channels != config_.n_channels || bn.gamma.size() != bn.channels ||
        bn.beta.size() != bn.channels || bn.running_mean.size() != bn.channels ||
        bn.running_var.size() != bn.channels) {
      throw Error(ErrorCode::kShapeMismatch, "batch-norm layer has wrong channel count");
    }
  }
}

std::vector<double> DenoiserNet::Run(std::span<const double> x, std::size_t batch, Mode mode,
                                     Tape* tape, std::vector<BatchNormLayer>* norms) const {
  const std::size_t width = config_.input_width;
  if (batch == 0 || x.size() != batch * width) {
    throw Error(ErrorCode::kShapeMismatch, "forward expects " + std::to_string(batch) + " x " +
                                               std::to_string(width) + " inputs, got " +
                                               std::to_string(x.size()) + " values");
  }
  const std::size_t nd = config_.downsample;
  const std::size_t length = config_.sub_length();
  const std::size_t n_layers = config_.n_layers;

  std::vector<double> h(batch * nd * length);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto subs = Downsample(x.subspan(b * width, width), nd);
    std::copy(subs.begin(), subs.end(), h.begin() + std::ptrdiff_t(b * nd * length));
  }
  if (tape) {
    *tape = Tape{};
    tape->batch = batch;
  }

  for (std::size_t i = 0; i < n_layers; ++i) {
    const ConvLayer& conv = convs_[i];
    std::vector<double> z(batch * conv.c_out * length);
    for (std::size_t b = 0; b < batch; ++b) {
      ConvForwardSample(h.data() + b * conv.c_in * length, conv.c_in, length, conv.weight.data(),
                        conv.bias.data(), conv.c_out, conv.kernel,
                        z.data() + b * conv.c_out * length);
    }
    if (tape) {
      tape->conv_inputs.push_back(std::move(h));
    }
    if (i + 1 == n_layers) {
      h = std::move(z);
      break;
    }
    if (i > 0) {
      const BatchNormLayer& bn = norms ? (*norms)[i - 1] : norms_[i - 1];
      const std::size_t ch = bn.channels;
      std::vector<double> mean(ch), inv_std(ch);
      if (mode == Mode::kTraining) {
        const double count = double(batch * length);
        for (std::size_t c = 0; c < ch; ++c) {
          double s = 0.0;
          for (std::size_t b = 0; b < batch; ++b) {
            const double* zc = z.data() + (b * ch + c) * length;
            for (std::size_t l = 0; l < length; ++l) s += zc[l];
          }
          const double mu = s / count;
          double v = 0.0;
          for (std::size_t b = 0; b < batch; ++b) {
            const double* zc = z.data() + (b * ch + c) * length;
            for (std::size_t l = 0; l < length; ++l) v += (zc[l] - mu) * (zc[l] - mu);
          }
          const double var = v / count;
          mean[c] = mu;
          inv_std[c] = 1.0 / std::sqrt(var + bn.epsilon);
          if (norms) {
            BatchNormLayer& upd = (*norms)[i - 1];
            const double unbiased = count > 1.0 ? v / (count - 1.0) : var;
            upd.running_mean[c] = (1.0 - upd.momentum) * upd.running_mean[c] + upd.momentum * mu;
            upd.running_var[c] =
                (1.0 - upd.momentum) * upd.running_var[c] + upd.momentum * unbiased;
          }
        }
      } else {
        for (std::size_t c = 0; c < ch; ++c) {
          mean[c] = bn.running_mean[c];
          inv_std[c] = 1.0 / std::sqrt(bn.running_var[c] + bn.epsilon);
        }
      }
      std::vector<double> xhat(z.size());
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t c = 0; c < ch; ++c) {
          const std::size_t off = (b * ch + c) * length;
          const double g = bn.gamma[c];
          const double be = bn.beta[c];
          for (std::size_t l = 0; l < length; ++l) {
            xhat[off + l] = (z[off + l] - mean[c]) * inv_std[c];
            z[off + l] = g * xhat[off + l] + be;
          }
        }
      }
      if (tape) {
        tape->bn_normalized.push_back(std::move(xhat));
        tape->bn_inv_std.push_back(std::move(inv_std));
      }
    }
    if (tape) tape->relu_inputs.push_back(z);
    for (double& v : z) v = v > 0.0 ? v : 0.0;
    h = std::move(z);
  }

  std::vector<double> out(batch * width);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto y = Upsample(std::span<const double>(h).subspan(b * nd * length, nd * length), nd,
                            width);
    std::copy(y.begin(), y.end(), out.begin() + std::ptrdiff_t(b * width));
  }
  return out;
}

std::vector<double> DenoiserNet::Forward(std::span<const double> x, std::size_t batch,
                                         Tape* tape) {
  if (mode_ == Mode::kTraining) return Run(x, batch, Mode::kTraining, tape, &norms_);
  if (tape) *tape = Tape{};
  return Run(x, batch, Mode::kInference, nullptr, nullptr);
}

std::vector<double> DenoiserNet::Denoise(std::span<const double> x) const {
  if (mode_ != Mode::kInference) {
    throw Error(ErrorCode::kConfigInvalid, "denoising requires an inference-mode network");
  }
  return Run(x, 1, Mode::kInference, nullptr, nullptr);
}

Gradients DenoiserNet::ZeroGradients() const {
  Gradients g;
  for (const auto& conv : convs_) {
    g.conv_weight.emplace_back(conv.weight.size(), 0.0);
    g.conv_bias.emplace_back(conv.bias.size(), 0.0);
  }
  for (const auto& bn : norms_) {
    g.bn_gamma.emplace_back(bn.channels, 0.0);
    g.bn_beta.emplace_back(bn.channels, 0.0);
  }
  return g;
}

Gradients DenoiserNet::Backward(const Tape& tape, std::span<const double> grad_output) const {
  const std::size_t n_layers = config_.n_layers;
  if (tape.batch == 0 || tape.conv_inputs.size() != n_layers) {
    throw Error(ErrorCode::kNotInTrainingMode,
                "backward needs a tape recorded by a training-mode forward pass");
  }
  const std::size_t batch = tape.batch;
  const std::size_t width = config_.input_width;
  const std::size_t nd = config_.downsample;
  const std::size_t length = config_.sub_length();
  if (grad_output.size() != batch * width) {
    throw Error(ErrorCode::kShapeMismatch, "output gradient has the wrong size");
  }

  Gradients grads = ZeroGradients();
  std::vector<double> g(batch * nd * length);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto subs = Downsample(grad_output.subspan(b * width, width), nd);
    std::copy(subs.begin(), subs.end(), g.begin() + std::ptrdiff_t(b * nd * length));
  }

  for (std::size_t step = 0; step < n_layers; ++step) {
    const std::size_t i = n_layers - 1 - step;
    const ConvLayer& conv = convs_[i];
    if (i + 1 < n_layers) {
      const auto& pre = tape.relu_inputs[i];
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (!(pre[j] > 0.0)) g[j] = 0.0;
      }
      if (i > 0) {
        const BatchNormLayer& bn = norms_[i - 1];
        const auto& xhat = tape.bn_normalized[i - 1];
        const auto& inv_std = tape.bn_inv_std[i - 1];
        const std::size_t ch = bn.channels;
        const double count = double(batch * length);
        auto& dgamma = grads.bn_gamma[i - 1];
        auto& dbeta = grads.bn_beta[i - 1];
        for (std::size_t c = 0; c < ch; ++c) {
          double sum_dy = 0.0, sum_dy_xhat = 0.0;
          for (std::size_t b = 0; b < batch; ++b) {
            const std::size_t off = (b * ch + c) * length;
            for (std::size_t l = 0; l < length; ++l) {
              sum_dy += g[off + l];
              sum_dy_xhat += g[off + l] * xhat[off + l];
            }
          }
          dgamma[c] += sum_dy_xhat;
          dbeta[c] += sum_dy;
          // dx = gamma * inv_std / M * (M dy - sum(dy) - xhat * sum(dy * xhat))
          const double k = bn.gamma[c] * inv_std[c] / count;
          for (std::size_t b = 0; b < batch; ++b) {
            const std::size_t off = (b * ch + c) * length;
            for (std::size_t l = 0; l < length; ++l) {
              g[off + l] = k * (count * g[off + l] - sum_dy - xhat[off + l] * sum_dy_xhat);
            }
          }
        }
      }
    }
    const auto& x = tape.conv_inputs[i];
    std::vector<double> dx(i > 0 ? batch * conv.c_in * length : 0, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
      ConvBackwardSample(x.data() + b * conv.c_in * length, conv.c_in, length,
                         conv.weight.data(), conv.c_out, conv.kernel,
                         g.data() + b * conv.c_out * length, grads.conv_weight[i].data(),
                         grads.conv_bias[i].data(),
                         i > 0 ? dx.data() + b * conv.c_in * length : nullptr);
    }
    g = std::move(dx);
  }
  return grads;
}

std::vector<std::span<double>> DenoiserNet::Parameters() {
  std::vector<std::span<double>> out;
  for (auto& conv : convs_) {
    out.emplace_back(conv.weight);
    out.emplace_back(conv.bias);
  }
  for (auto& bn : norms_) {
    out.emplace_back(bn.gamma);
    out.emplace_back(bn.beta);
  }
  return out;
}

std::vector<std::span<const double>> DenoiserNet::Flatten(const Gradients& g) {
  std::vector<std::span<const double>> out;
  for (std::size_t i = 0; i < g.conv_weight.size(); ++i) {
    out.emplace_back(g.conv_weight[i]);
    out.emplace_back(g.conv_bias[i]);
  }
  for (std::size_t i = 0; i < g.bn_gamma.size(); ++i) {
    out.emplace_back(g.bn_gamma[i]);
    out.emplace_back(g.bn_beta[i]);
  }
  return out;
}

std::size_t DenoiserNet::CountConvParameters() const {
  std::size_t n = 0;
  for (const auto& conv : convs_) n += conv.weight.size() + conv.bias.size();
  return n;
}

PodLossTerm PodLossTerm::From(const PodModel& pod) {
  return {pod.bases(), pod.NormalizationScale()};
}

LossValue CompositeLoss(std::span<const double> y_hat, std::span<const double> y,
                        std::size_t batch, const PodLossTerm& pod, double alpha) {
  const auto width = std::size_t(pod.bases.cols());
  if (batch == 0 || y_hat.size() != batch * width || y.size() != y_hat.size()) {
    throw Error(ErrorCode::kShapeMismatch, "loss operands must both be batch x W");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kConfigInvalid, "loss blend alpha must lie in [0, 1]");
  }
  LossValue out;
  out.grad.assign(y_hat.size(), 0.0);
  const double inv_batch = 1.0 / double(batch);
  Eigen::VectorXd diff = Eigen::VectorXd::Zero(Eigen::Index(width));
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < width; ++i) diff(Eigen::Index(i)) = y_hat[b * width + i] - y[b * width + i];
    const double mse = diff.squaredNorm();
    const Eigen::VectorXd coeff = (pod.bases * diff).cwiseProduct(pod.scale);
    out.value += (1.0 - alpha) * mse + alpha * coeff.squaredNorm();
    const Eigen::VectorXd g = 2.0 * (1.0 - alpha) * diff +
                              2.0 * alpha * pod.bases.transpose() * coeff.cwiseProduct(pod.scale);
    for (std::size_t i = 0; i < width; ++i) out.grad[b * width + i] = g(Eigen::Index(i)) * inv_batch;
  }
  out.value *= inv_batch;
  return out;
}

AdamState AdamState::For(const std::vector<std::span<double>>& params) {
  AdamState s;
  for (const auto& p : params) {
    s.first_moment.emplace_back(p.size(), 0.0);
    s.second_moment.emplace_back(p.size(), 0.0);
  }
  return s;
}

void AdamStep(AdamState& state, const std::vector<std::span<double>>& params,
              const std::vector<std::span<const double>>& grads, double lr,
              const AdamConfig& cfg) {
  if (params.size() != grads.size() || state.first_moment.size() != params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "ADAM parameter, gradient and state lists differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != grads[i].size() || state.first_moment[i].size() != params[i].size()) {
      throw Error(ErrorCode::kShapeMismatch, "ADAM tensor " + std::to_string(i) + " shape differs");
    }
  }
  ++state.step;
  const double t = double(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      const double g = grads[i][j];
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g;
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g * g;
      params[i][j] -= lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + cfg.epsilon);
    }
  }
}

void SchedulerConfig::Validate() const {
  if (!(first_cycle_steps > 0.0 && cycle_mult > 0.0 && max_lr > 0.0 && warmup_steps > 0.0 &&
        gamma > 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "all scheduler constants must be positive");
  }
  if (!(warmup_steps < first_cycle_steps)) {
    throw Error(ErrorCode::kConfigInvalid, "scheduler warmup must be shorter than a cycle");
  }
}

double LrSchedule(std::size_t step, const SchedulerConfig& cfg) {
  double t = double(step);
  double len = cfg.first_cycle_steps;
  double peak = cfg.max_lr;
  while (t >= len) {
    t -= len;
    len *= cfg.cycle_mult;
    peak *= cfg.gamma;
  }
  if (t < cfg.warmup_steps) return peak * t / cfg.warmup_steps;
  const double frac = (t - cfg.warmup_steps) / (len - cfg.warmup_steps);
  return peak * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

void TrainConfig::Validate() const {
  if (epochs < 1) throw Error(ErrorCode::kConfigInvalid, "train.epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::kConfigInvalid, "train.batch_size must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kConfigInvalid, "train.alpha must lie in [0, 1]");
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw Error(ErrorCode::kConfigInvalid, "train.validation_fraction must lie in (0, 1)");
  }
  if (!(augment_lo > 0.0 && augment_lo <= augment_hi)) {
    throw Error(ErrorCode::kConfigInvalid, "train augmentation range is invalid");
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 &&
        adam.epsilon > 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "ADAM constants are out of range");
  }
  scheduler.Validate();
}

std::vector<std::size_t> ValidationConditions(std::size_t n_conditions, double fraction,
                                              std::uint64_t seed) {
  if (n_conditions < 2) return {};
  auto count = std::size_t(std::max<long>(1, std::lround(fraction * double(n_conditions))));
  count = std::min(count, n_conditions - 1);
  std::vector<std::size_t> idx(n_conditions);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(StreamSeed(seed, 0x56414c));
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

struct PairIndex {
  std::size_t condition;
  std::size_t ls;
  std::size_t hs;
};

std::vector<PairIndex> EnumeratePairs(const std::vector<ConditionSamples>& data,
                                      std::size_t width) {
  std::vector<PairIndex> pairs;
  for (std::size_t c = 0; c < data.size(); ++c) {
    for (const auto& s : data[c].low_snr) {
      if (s.size() != width) throw Error(ErrorCode::kShapeMismatch, "LS spectrum width differs from network input");
    }
    for (const auto& s : data[c].high_snr) {
      if (s.size() != width) throw Error(ErrorCode::kShapeMismatch, "HS spectrum width differs from network input");
    }
    for (std::size_t i = 0; i < data[c].low_snr.size(); ++i) {
      for (std::size_t j = 0; j < data[c].high_snr.size(); ++j) pairs.push_back({c, i, j});
    }
  }
  return pairs;
}

}  // namespace

double EvaluateLoss(const DenoiserNet& net, const std::vector<ConditionSamples>& data,
                    const PodLossTerm& pod, double alpha) {
  const std::size_t width = net.config().input_width;
  const auto pairs = EnumeratePairs(data, width);
  if (pairs.empty()) return std::numeric_limits<double>::quiet_NaN();
  DenoiserNet probe = net;
  probe.set_mode(Mode::kInference);
  // Each LS spectrum is denoised once and compared with all of its HS labels.
  double total = 0.0;
  for (const auto& cond : data) {
    for (const auto& ls : cond.low_snr) {
      const auto y_hat = probe.Denoise(ls);
      for (const auto& hs : cond.high_snr) {
        total += CompositeLoss(y_hat, hs, 1, pod, alpha).value;
      }
    }
  }
  return total / double(pairs.size());
}

TrainResult Train(const std::vector<ConditionSamples>& train,
                  const std::vector<ConditionSamples>& validation, const NetworkConfig& net_cfg,
                  const TrainConfig& train_cfg, const PodModel& pod) {
  net_cfg.Validate();
  train_cfg.Validate();
  const std::size_t width = net_cfg.input_width;
  if (pod.width() != width) {
    throw Error(ErrorCode::kShapeMismatch, "POD width differs from network input width");
  }
  const auto pairs = EnumeratePairs(train, width);
  if (pairs.empty()) throw Error(ErrorCode::kEmptyDataset, "no training pairs");
  EnumeratePairs(validation, width);
  const PodLossTerm loss_term = PodLossTerm::From(pod);

  DenoiserNet net(net_cfg, StreamSeed(train_cfg.seed, 0x494e4954));
  AdamState adam = AdamState::For(net.Parameters());
  std::vector<EpochRecord> log;
  DenoiserNet best = net;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> x, y;
  for (std::size_t epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    const double lr = LrSchedule(epoch, train_cfg.scheduler);
    std::mt19937_64 rng(StreamSeed(train_cfg.seed, 0x45504f43, epoch));
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_real_distribution<double> factor(train_cfg.augment_lo, train_cfg.augment_hi);

    net.set_mode(Mode::kTraining);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += train_cfg.batch_size) {
      const std::size_t batch = std::min(train_cfg.batch_size, order.size() - start);
      x.assign(batch * width, 0.0);
      y.assign(batch * width, 0.0);
      for (std::size_t b = 0; b < batch; ++b) {
        const PairIndex& p = pairs[order[start + b]];
        const double f = factor(rng);
        const auto& ls = train[p.condition].low_snr[p.ls];
        const auto& hs = train[p.condition].high_snr[p.hs];
        for (std::size_t i = 0; i < width; ++i) {
          x[b * width + i] = f * ls[i];
          y[b * width + i] = f * hs[i];
        }
      }
      Tape tape;
      const auto y_hat = net.Forward(x, batch, &tape);
      const LossValue loss = CompositeLoss(y_hat, y, batch, loss_term, train_cfg.alpha);
      const Gradients grads = net.Backward(tape, loss.grad);
      AdamStep(adam, net.Parameters(), DenoiserNet::Flatten(grads), lr, train_cfg.adam);
      epoch_loss += loss.value * double(batch);
    }
    net.set_mode(Mode::kInference);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.step = adam.step;
    rec.lr = lr;
    rec.train_loss = epoch_loss / double(pairs.size());
    rec.validation_loss = EvaluateLoss(net, validation, loss_term, train_cfg.alpha);
    log.push_back(rec);

    const double score = validation.empty() ? 0.0 : rec.validation_loss;
    if (validation.empty() || score < best_loss) {
      best_loss = score;
      best = net;
      best_epoch = epoch;
    }
  }
  best.set_mode(Mode::kInference);
  return TrainResult{std::move(best), std::move(adam), std::move(log), best_epoch};
}

DenoiserNet ProbeNet(const NetworkConfig& cfg, std::uint64_t seed) {
  DenoiserNet net(cfg, seed);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.5, 1.5);
  for (auto& conv : net.convs()) {
    const double fan_in = double(conv.c_in * conv.kernel);
    for (double& w : conv.weight) w = unit(rng) / fan_in;
    for (double& b : conv.bias) b = 0.01;
  }
  net.set_mode(Mode::kInference);
  return net;
}

std::size_t EmpiricalReceptiveField(const DenoiserNet& net) {
  if (net.mode() != Mode::kInference) {
    throw Error(ErrorCode::kConfigInvalid, "footprint probe requires an inference-mode network");
  }
  // Probe on the padded domain the layers actually see; cropping back to W
  // would hide the zero tail. Layer shapes do not depend on the width.
  NetworkConfig cfg = net.config();
  cfg.input_width = cfg.padded_width();
  DenoiserNet padded(cfg, net.convs(), net.norms());
  const std::size_t width = cfg.input_width;
  const std::size_t center = ((cfg.sub_length() - 1) / 2) * cfg.downsample;
  std::vector<double> x(width, 1.0);
  const auto base = padded.Denoise(x);
  x[center] += 1.0;
  const auto moved = padded.Denoise(x);
  std::size_t count = 0;
  for (std::size_t i = 0; i < width; ++i) {
    if (std::abs(moved[i] - base[i]) > 1e-12) ++count;
  }
  return count;
}

}  // namespace flamespec::dnn
