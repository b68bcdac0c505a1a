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

#ifndef FLAMESPEC_KRIGING_HPP_
#define FLAMESPEC_KRIGING_HPP_

#include <cstddef>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace flamespec {

struct KrigingOptions {
  double theta_lo = 1e-3;
  double theta_hi = 1e3;
  std::size_t grid_points = 20;
  /// Relative nugget: nugget * var(targets) is added to the covariance
  /// diagonal, i.e. nugget * var / sigma^2 to the unit correlation diagonal.
  double nugget = 1e-10;
  std::size_t max_sweeps = 30;
  double min_log_step = 1e-3;  // log10 units
};

/// Ordinary kriging with an anisotropic Gaussian correlation
/// R_ij = exp(-sum_d theta_d (x_id - x_jd)^2), one independent model per
/// output column.
class KrigingModel {
 public:
  struct Prediction {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
  };

  /// Maximum-likelihood fit: isotropic log-grid scan, then coordinate descent
  /// in log(theta) per dimension.
  static KrigingModel Fit(const Eigen::MatrixXd& sites, const Eigen::MatrixXd& targets,
                          const KrigingOptions& options = {});

  /// Rebuilds a model with fixed hyperparameters; theta is k x m (one column
  /// per output). Deterministic, so archive reloads reproduce predictions.
  static KrigingModel FromParameters(Eigen::MatrixXd sites, Eigen::MatrixXd targets,
                                     Eigen::MatrixXd theta, double nugget);

  Prediction Predict(const Eigen::VectorXd& x) const;

  std::size_t n_sites() const { return std::size_t(sites_.rows()); }
  std::size_t input_dim() const { return std::size_t(sites_.cols()); }
  std::size_t output_dim() const { return std::size_t(targets_.cols()); }
  const Eigen::MatrixXd& sites() const { return sites_; }
  const Eigen::MatrixXd& targets() const { return targets_; }
  const Eigen::MatrixXd& theta() const { return theta_; }
  const Eigen::VectorXd& trend() const { return trend_; }
  const Eigen::VectorXd& process_variance() const { return process_variance_; }
  double nugget() const { return nugget_; }
  /// Per-output nugget actually added to the correlation diagonal.
  const Eigen::VectorXd& effective_nugget() const { return effective_nugget_; }

  /// Concentrated log-likelihood of one output column under `theta`.
  static double ConcentratedLogLikelihood(const Eigen::MatrixXd& sites, const Eigen::VectorXd& y,
                                          const Eigen::VectorXd& theta, double nugget);

  static Eigen::MatrixXd Correlation(const Eigen::MatrixXd& sites, const Eigen::VectorXd& theta,
                                     double nugget);

 private:
  static constexpr int kNuggetIterations = 4;

  struct Solved {
    Eigen::LLT<Eigen::MatrixXd> chol;
    Eigen::VectorXd r_inv_ones;
    Eigen::VectorXd weights;
    double mu = 0.0;
    double sigma2 = 0.0;
    double tau = 0.0;
    bool ok = false;
  };
  static Solved SolveOutput(const Eigen::MatrixXd& sites, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& theta, double nugget);

  struct Output {
    Eigen::LLT<Eigen::MatrixXd> chol;
    Eigen::VectorXd weights;     // R^-1 (y - mu 1)
    Eigen::VectorXd r_inv_ones;  // R^-1 1
    double ones_r_inv_ones = 0.0;
    bool pure_trend = false;
  };

  KrigingModel() = default;
  void Factorize();

  Eigen::MatrixXd sites_;
  Eigen::MatrixXd targets_;
  Eigen::MatrixXd theta_;
  Eigen::VectorXd trend_;
  Eigen::VectorXd process_variance_;
  double nugget_ = 0.0;
  Eigen::VectorXd effective_nugget_;
  std::vector<Output> outputs_;
};

}  // namespace flamespec

#endif  // FLAMESPEC_KRIGING_HPP_
