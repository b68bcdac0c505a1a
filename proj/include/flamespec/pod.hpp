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

#ifndef FLAMESPEC_POD_HPP_
#define FLAMESPEC_POD_HPP_

#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace flamespec {

/// Snapshot POD of OH*-normalized high-SNR spectra.
///
/// Bases are the leading right singular vectors of the raw (uncentered)
/// snapshot matrix, stored one per row. Each basis is oriented so that its
/// largest-magnitude entry is positive. Coefficient bounds are the per-mode
/// extrema of the training projections and are frozen at fit time.
class PodModel {
 public:
  static constexpr std::size_t kDefaultRank = 5;

  /// `snapshots` is n x W, one spectrum per row.
  static PodModel Fit(const Eigen::MatrixXd& snapshots, std::size_t k = kDefaultRank);

  /// Reassembles a fitted model (archive load); validates all invariants.
  PodModel(Eigen::MatrixXd bases, Eigen::VectorXd singular_values,
           Eigen::VectorXd energy_fraction, Eigen::VectorXd coeff_min,
           Eigen::VectorXd coeff_max);

  std::size_t rank() const { return std::size_t(bases_.rows()); }
  std::size_t width() const { return std::size_t(bases_.cols()); }
  const Eigen::MatrixXd& bases() const { return bases_; }
  const Eigen::VectorXd& singular_values() const { return singular_values_; }
  const Eigen::VectorXd& energy_fraction() const { return energy_fraction_; }
  const Eigen::VectorXd& coeff_min() const { return coeff_min_; }
  const Eigen::VectorXd& coeff_max() const { return coeff_max_; }
  double cumulative_energy() const { return energy_fraction_.sum(); }

  Eigen::VectorXd Project(std::span<const double> spectrum) const;
  Eigen::VectorXd Reconstruct(const Eigen::VectorXd& coeffs) const;
  /// (c - min) / (max - min) per mode; values outside [0, 1] are kept.
  Eigen::VectorXd NormalizedCoeffs(std::span<const double> spectrum) const;
  Eigen::VectorXd NormalizeCoeffs(const Eigen::VectorXd& raw) const;
  /// d(normalized coeff j)/d(spectrum) = bases.row(j) / (max_j - min_j).
  Eigen::VectorXd NormalizationScale() const;

 private:
  PodModel() = default;
  void Validate() const;

  Eigen::MatrixXd bases_;
  Eigen::VectorXd singular_values_;
  Eigen::VectorXd energy_fraction_;
  Eigen::VectorXd coeff_min_;
  Eigen::VectorXd coeff_max_;
};

}  // namespace flamespec

#endif  // FLAMESPEC_POD_HPP_
