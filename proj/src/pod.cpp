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

#include "flamespec/pod.hpp"

#include <cmath>
#include <string>

#include "flamespec/error.hpp"

namespace flamespec {

PodModel PodModel::Fit(const Eigen::MatrixXd& snapshots, std::size_t k) {
  const auto n = std::size_t(snapshots.rows());
  const auto w = std::size_t(snapshots.cols());
  if (k < 1 || n < k) {
    throw Error(ErrorCode::kRankDeficient, "POD needs at least k = " + std::to_string(k) +
                                               " snapshots, got " + std::to_string(n));
  }
  if (k > w) throw Error(ErrorCode::kRankDeficient, "POD rank exceeds spectrum width");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(snapshots, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double total = sv.squaredNorm();
  const double tol = double(std::max(n, w)) * 1e-13 * (sv.size() > 0 ? sv(0) : 0.0);
  if (!(total > 0.0) || !(sv(Eigen::Index(k) - 1) > tol)) {
    throw Error(ErrorCode::kRankDeficient,
                "snapshot matrix has rank below " + std::to_string(k) +
                    "; reduce pod.k or add training conditions");
  }

  PodModel m;
  m.bases_ = svd.matrixV().leftCols(Eigen::Index(k)).transpose();
  for (Eigen::Index j = 0; j < m.bases_.rows(); ++j) {
    Eigen::Index arg = 0;
    m.bases_.row(j).cwiseAbs().maxCoeff(&arg);
    if (m.bases_(j, arg) < 0.0) m.bases_.row(j) *= -1.0;
  }
  m.singular_values_ = sv.head(Eigen::Index(k));
  m.energy_fraction_ = m.singular_values_.array().square() / total;

  const Eigen::MatrixXd coeffs = snapshots * m.bases_.transpose();  // n x k
  m.coeff_min_ = coeffs.colwise().minCoeff().transpose();
  m.coeff_max_ = coeffs.colwise().maxCoeff().transpose();
  m.Validate();
  return m;
}

PodModel::PodModel(Eigen::MatrixXd bases, Eigen::VectorXd singular_values,
                   Eigen::VectorXd energy_fraction, Eigen::VectorXd coeff_min,
                   Eigen::VectorXd coeff_max)
    : bases_(std::move(bases)),
      singular_values_(std::move(singular_values)),
      energy_fraction_(std::move(energy_fraction)),
      coeff_min_(std::move(coeff_min)),
      coeff_max_(std::move(coeff_max)) {
  const auto k = bases_.rows();
  if (singular_values_.size() != k || energy_fraction_.size() != k || coeff_min_.size() != k ||
      coeff_max_.size() != k) {
    throw Error(ErrorCode::kLengthMismatch, "POD model arrays disagree on rank");
  }
  Validate();
}

void PodModel::Validate() const {
  const auto k = bases_.rows();
  const Eigen::MatrixXd gram = bases_ * bases_.transpose();
  const double err = (gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
  if (!(err < 1e-8)) {
    throw Error(ErrorCode::kRankDeficient, "POD bases are not orthonormal (max error " +
                                               std::to_string(err) + ")");
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    if (singular_values_(j) < 0.0 || (j > 0 && singular_values_(j) > singular_values_(j - 1))) {
      throw Error(ErrorCode::kRankDeficient, "singular values must be non-negative, non-increasing");
    }
    if (!(coeff_min_(j) < coeff_max_(j))) {
      throw Error(ErrorCode::kDegenerateBounds,
                  "coefficient " + std::to_string(j + 1) +
                      " has identical min and max over the training set");
    }
  }
  if (energy_fraction_.sum() > 1.0 + 1e-9) {
    throw Error(ErrorCode::kRankDeficient, "energy fractions sum above 1");
  }
}

Eigen::VectorXd PodModel::Project(std::span<const double> spectrum) const {
  if (spectrum.size() != width()) {
    throw Error(ErrorCode::kLengthMismatch, "spectrum has " + std::to_string(spectrum.size()) +
                                                " pixels, POD expects " + std::to_string(width()));
  }
  const Eigen::Map<const Eigen::VectorXd> s(spectrum.data(), Eigen::Index(spectrum.size()));
  return bases_ * s;
}

Eigen::VectorXd PodModel::Reconstruct(const Eigen::VectorXd& coeffs) const {
  if (std::size_t(coeffs.size()) != rank()) {
    throw Error(ErrorCode::kLengthMismatch, "expected " + std::to_string(rank()) +
                                                " coefficients, got " +
                                                std::to_string(coeffs.size()));
  }
  return bases_.transpose() * coeffs;
}

Eigen::VectorXd PodModel::NormalizeCoeffs(const Eigen::VectorXd& raw) const {
  if (std::size_t(raw.size()) != rank()) {
    throw Error(ErrorCode::kLengthMismatch, "coefficient count differs from POD rank");
  }
  return (raw - coeff_min_).cwiseQuotient(coeff_max_ - coeff_min_);
}

Eigen::VectorXd PodModel::NormalizedCoeffs(std::span<const double> spectrum) const {
  return NormalizeCoeffs(Project(spectrum));
}

Eigen::VectorXd PodModel::NormalizationScale() const {
  return (coeff_max_ - coeff_min_).cwiseInverse();
}

}  // namespace flamespec
