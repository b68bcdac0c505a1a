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

#include "flamespec/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "flamespec/error.hpp"

namespace flamespec {

Eigen::MatrixXd KrigingModel::Correlation(const Eigen::MatrixXd& sites,
                                          const Eigen::VectorXd& theta, double nugget) {
  const Eigen::Index n = sites.rows();
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = 1.0 + nugget;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double d = (sites.row(i) - sites.row(j)).array().square().matrix().dot(theta);
      r(i, j) = r(j, i) = std::exp(-d);
    }
  }
  return r;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool IsConstant(const Eigen::VectorXd& y) {
  return (y.array() - y(0)).abs().maxCoeff() <= 1e-14 * std::max(1.0, std::abs(y(0)));
}

}  // namespace

KrigingModel::Solved KrigingModel::SolveOutput(const Eigen::MatrixXd& sites,
                                               const Eigen::VectorXd& y,
                                               const Eigen::VectorXd& theta, double nugget) {
  const Eigen::Index n = y.size();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const double target_var = (y.array() - y.mean()).square().sum() / double(n);
  const Eigen::MatrixXd r = Correlation(sites, theta, 0.0);
  Solved s;
  // The nugget is nugget * var(y) in covariance units; in correlation units
  // that is nugget * var(y) / sigma^2, and sigma^2 depends on it in turn.
  s.tau = nugget;
  for (int it = 0; it < kNuggetIterations; ++it) {
    s.chol.compute(r + s.tau * Eigen::MatrixXd::Identity(n, n));
    if (s.chol.info() != Eigen::Success) return s;
    s.r_inv_ones = s.chol.solve(ones);
    s.mu = s.r_inv_ones.dot(y) / s.r_inv_ones.sum();
    s.weights = s.chol.solve(y - s.mu * ones);
    s.sigma2 = (y - s.mu * ones).dot(s.weights) / double(n);
    if (!(s.sigma2 > 0.0) || !std::isfinite(s.sigma2)) return s;
    if (it + 1 < kNuggetIterations) s.tau = nugget * target_var / s.sigma2;
  }
  s.ok = true;
  return s;
}

double KrigingModel::ConcentratedLogLikelihood(const Eigen::MatrixXd& sites,
                                               const Eigen::VectorXd& y,
                                               const Eigen::VectorXd& theta, double nugget) {
  const Solved s = SolveOutput(sites, y, theta, nugget);
  if (!s.ok) return kNegInf;
  const double log_det = 2.0 * s.chol.matrixLLT().diagonal().array().log().sum();
  return -0.5 * double(y.size()) * std::log(s.sigma2) - 0.5 * log_det;
}

KrigingModel KrigingModel::Fit(const Eigen::MatrixXd& sites, const Eigen::MatrixXd& targets,
                               const KrigingOptions& options) {
  if (sites.rows() < 2) throw Error(ErrorCode::kBadSites, "kriging needs at least 2 sites");
  if (sites.cols() < 1) throw Error(ErrorCode::kBadSites, "kriging inputs need k >= 1");
  if (targets.rows() != sites.rows()) {
    throw Error(ErrorCode::kBadSites, "sites and targets disagree on row count");
  }
  if (!(options.theta_lo > 0.0 && options.theta_lo < options.theta_hi) ||
      options.grid_points < 2) {
    throw Error(ErrorCode::kConfigInvalid, "kriging theta bounds must satisfy 0 < lo < hi");
  }
  const Eigen::Index k = sites.cols();
  const double log_lo = std::log10(options.theta_lo);
  const double log_hi = std::log10(options.theta_hi);
  const double grid_step = (log_hi - log_lo) / double(options.grid_points - 1);

  Eigen::MatrixXd theta(k, targets.cols());
  for (Eigen::Index out = 0; out < targets.cols(); ++out) {
    const Eigen::VectorXd y = targets.col(out);
    if (IsConstant(y)) {
      theta.col(out).setOnes();
      continue;
    }
    auto score = [&](const Eigen::VectorXd& log_theta) {
      const Eigen::VectorXd t = log_theta.unaryExpr([](double v) { return std::pow(10.0, v); });
      return ConcentratedLogLikelihood(sites, y, t, options.nugget);
    };

    Eigen::VectorXd best(k);
    double best_score = kNegInf;
    for (std::size_t g = 0; g < options.grid_points; ++g) {
      const Eigen::VectorXd candidate = Eigen::VectorXd::Constant(k, log_lo + double(g) * grid_step);
      const double s = score(candidate);
      if (s > best_score) {
        best_score = s;
        best = candidate;
      }
    }
    if (best_score == kNegInf) {
      throw Error(ErrorCode::kSingularCorrelation,
                  "correlation matrix is singular for every theta (duplicate sites without "
                  "nugget?)");
    }

    double step = grid_step;
    for (std::size_t sweep = 0; sweep < options.max_sweeps && step >= options.min_log_step;
         ++sweep) {
      bool improved = false;
      for (Eigen::Index d = 0; d < k; ++d) {
        for (double dir : {1.0, -1.0}) {
          Eigen::VectorXd candidate = best;
          candidate(d) = std::clamp(best(d) + dir * step, log_lo, log_hi);
          if (candidate(d) == best(d)) continue;
          const double s = score(candidate);
          if (s > best_score) {
            best_score = s;
            best = candidate;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    theta.col(out) = best.unaryExpr([](double v) { return std::pow(10.0, v); });
  }
  return FromParameters(sites, targets, theta, options.nugget);
}

KrigingModel KrigingModel::FromParameters(Eigen::MatrixXd sites, Eigen::MatrixXd targets,
                                          Eigen::MatrixXd theta, double nugget) {
  if (sites.rows() < 2 || targets.rows() != sites.rows() || theta.rows() != sites.cols() ||
      theta.cols() != targets.cols()) {
    throw Error(ErrorCode::kBadSites, "inconsistent kriging parameter shapes");
  }
  if (!(theta.array() > 0.0).all()) throw Error(ErrorCode::kConfigInvalid, "theta must be > 0");
  if (!(nugget >= 0.0)) throw Error(ErrorCode::kConfigInvalid, "nugget must be >= 0");
  KrigingModel m;
  m.sites_ = std::move(sites);
  m.targets_ = std::move(targets);
  m.theta_ = std::move(theta);
  m.nugget_ = nugget;
  m.Factorize();
  return m;
}

void KrigingModel::Factorize() {
  const Eigen::Index n = sites_.rows();
  const Eigen::Index m = targets_.cols();
  trend_.resize(m);
  process_variance_.resize(m);
  effective_nugget_.resize(m);
  outputs_.clear();
  outputs_.resize(std::size_t(m));
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  for (Eigen::Index out = 0; out < m; ++out) {
    auto& o = outputs_[std::size_t(out)];
    const Eigen::VectorXd y = targets_.col(out);
    if (IsConstant(y)) {
      o.pure_trend = true;
      trend_(out) = y(0);
      process_variance_(out) = 0.0;
      effective_nugget_(out) = nugget_;
      continue;
    }
    Solved s = SolveOutput(sites_, y, theta_.col(out), nugget_);
    if (!s.ok) {
      throw Error(ErrorCode::kSingularCorrelation,
                  "correlation matrix is not positive definite (output " + std::to_string(out) +
                      ")");
    }
    o.chol = std::move(s.chol);
    o.weights = std::move(s.weights);
    o.r_inv_ones = std::move(s.r_inv_ones);
    o.ones_r_inv_ones = o.r_inv_ones.sum();
    trend_(out) = s.mu;
    process_variance_(out) = s.sigma2;
    effective_nugget_(out) = s.tau;
  }
}

KrigingModel::Prediction KrigingModel::Predict(const Eigen::VectorXd& x) const {
  if (x.size() != sites_.cols()) {
    throw Error(ErrorCode::kLengthMismatch, "query has " + std::to_string(x.size()) +
                                                " inputs, model expects " +
                                                std::to_string(sites_.cols()));
  }
  if (!x.allFinite()) throw Error(ErrorCode::kConfigInvalid, "query contains non-finite values");
  Prediction p{Eigen::VectorXd(targets_.cols()), Eigen::VectorXd(targets_.cols())};
  const Eigen::MatrixXd diff2 = (sites_.rowwise() - x.transpose()).array().square().matrix();
  for (Eigen::Index out = 0; out < targets_.cols(); ++out) {
    const auto& o = outputs_[std::size_t(out)];
    if (o.pure_trend) {
      p.mean(out) = trend_(out);
      p.variance(out) = 0.0;
      continue;
    }
    const Eigen::VectorXd r = (-(diff2 * theta_.col(out))).array().exp().matrix();
    p.mean(out) = trend_(out) + r.dot(o.weights);
    const Eigen::VectorXd r_inv_r = o.chol.solve(r);
    const double u = 1.0 - o.r_inv_ones.dot(r);
    const double var = process_variance_(out) *
                       (1.0 - r.dot(r_inv_r) + u * u / o.ones_r_inv_ones);
    p.variance(out) = std::max(0.0, var);
  }
  return p;
}

}  // namespace flamespec
