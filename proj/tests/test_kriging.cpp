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

#include <random>

#include "flamespec/kriging.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace flamespec;

namespace {

Eigen::MatrixXd Uniform(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

}  // namespace

TEST_CASE("kriging matches a dense-inverse oracle for n <= 8") {
  for (Eigen::Index n = 2; n <= 8; ++n) {
    const Eigen::MatrixXd sites = Uniform(n, 3, std::uint64_t(n));
    Eigen::MatrixXd targets(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      targets(i, 0) = 1.0 + 9.0 * sites(i, 0) + std::sin(3.0 * sites(i, 1));
      targets(i, 1) = 0.8 + 0.4 * sites(i, 2) * sites(i, 0);
    }
    const KrigingModel m = KrigingModel::Fit(sites, targets);
    const Eigen::MatrixXd queries = Uniform(5, 3, 100 + std::uint64_t(n));
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
      const Eigen::VectorXd x = queries.row(q).transpose();
      const auto p = m.Predict(x);
      for (Eigen::Index o = 0; o < 2; ++o) {
        const auto [mean, var] = oracle::DenseKriging(sites, targets.col(o), m.theta().col(o),
                                              m.effective_nugget()(o), x);
        CHECK(std::abs(p.mean(o) - mean) <= 1e-8 * std::max(1.0, std::abs(mean)));
        CHECK(std::abs(p.variance(o) - std::max(0.0, var)) <=
              1e-8 * std::max(1.0, m.process_variance()(o)));
      }
    }
  }
}

TEST_CASE("kriging interpolates its sites") {
  SUBCASE("two sites") {
    Eigen::MatrixXd s(2, 1), t(2, 1);
    s << 0.1, 0.9;
    t << 3.0, 7.0;
    const KrigingModel m = KrigingModel::Fit(s, t);
    CHECK(testutil::RelErr(m.Predict(s.row(0).transpose()).mean(0), 3.0) < 1e-6);
    CHECK(testutil::RelErr(m.Predict(s.row(1).transpose()).mean(0), 7.0) < 1e-6);
  }
  SUBCASE("random sites in five dimensions") {
    const Eigen::MatrixXd sites = Uniform(25, 5, 3);
    Eigen::MatrixXd targets(25, 2);
    for (Eigen::Index i = 0; i < 25; ++i) {
      targets(i, 0) = 1.0 + 9.0 * sites(i, 0) * sites(i, 1);
      targets(i, 1) = 0.8 + 0.4 * sites(i, 2);
    }
    const KrigingModel m = KrigingModel::Fit(sites, targets);
    for (Eigen::Index i = 0; i < 25; ++i) {
      const auto p = m.Predict(sites.row(i).transpose());
      CHECK(testutil::RelErr(p.mean(0), targets(i, 0)) < 1e-6);
      CHECK(testutil::RelErr(p.mean(1), targets(i, 1)) < 1e-6);
      CHECK(p.variance(0) <= 1e-6 * m.process_variance()(0));
    }
  }
}

TEST_CASE("kriging reference behaviours") {
  SUBCASE("constant target is a pure trend") {
    const Eigen::MatrixXd s = Uniform(6, 2, 5);
    const Eigen::MatrixXd t = Eigen::MatrixXd::Constant(6, 1, 4.25);
    const KrigingModel m = KrigingModel::Fit(s, t);
    CHECK(std::abs(m.Predict(Eigen::Vector2d(0.3, 0.7)).mean(0) - 4.25) < 1e-6 * 4.25);
  }
  SUBCASE("far query reverts to the trend") {
    Eigen::MatrixXd s(3, 1), t(3, 1);
    s << 0.0, 0.5, 1.0;
    t << 1.0, 2.0, 0.5;
    const KrigingModel m = KrigingModel::FromParameters(s, t, Eigen::MatrixXd::Constant(1, 1, 10.0), 1e-8);
    const auto p = m.Predict(Eigen::VectorXd::Constant(1, 50.0));
    CHECK(p.mean(0) == doctest::Approx(m.trend()(0)).epsilon(1e-12));
    // sigma^2 (1 + 1 / 1'R^-1 1): the prior plus trend uncertainty.
    CHECK(p.variance(0) >= m.process_variance()(0));
    CHECK(p.variance(0) <= 2.0 * m.process_variance()(0));
  }
  SUBCASE("symmetric midpoint") {
    Eigen::MatrixXd s(2, 2), t(2, 1);
    s << 0.2, 0.2, 0.8, 0.8;
    t << 0.0, 1.0;
    const KrigingModel m = KrigingModel::FromParameters(s, t, Eigen::MatrixXd::Constant(2, 1, 2.0), 1e-8);
    CHECK(std::abs(m.Predict(Eigen::Vector2d(0.5, 0.5)).mean(0) - 0.5) < 1e-9);
  }
  SUBCASE("linear targets on a 5x5 grid: leave-one-out error") {
    Eigen::MatrixXd s(25, 2), t(25, 1);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        s.row(i * 5 + j) << i / 4.0, j / 4.0;
        t(i * 5 + j, 0) = 2.0 * s(i * 5 + j, 0) - 3.0 * s(i * 5 + j, 1) + 1.0;
      }
    const double range = t.maxCoeff() - t.minCoeff();
    for (int hold = 0; hold < 25; ++hold) {
      Eigen::MatrixXd s2(24, 2), t2(24, 1);
      for (int i = 0, r = 0; i < 25; ++i)
        if (i != hold) s2.row(r) = s.row(i), t2.row(r) = t.row(i), ++r;
      const KrigingModel m = KrigingModel::Fit(s2, t2);
      CHECK(std::abs(m.Predict(s.row(hold).transpose()).mean(0) - t(hold, 0)) < 0.01 * range);
    }
  }
}

TEST_CASE("kriging properties") {
  const Eigen::MatrixXd sites = Uniform(12, 3, 21);
  Eigen::MatrixXd targets(12, 1);
  for (Eigen::Index i = 0; i < 12; ++i) targets(i, 0) = std::cos(2 * sites(i, 0)) + sites(i, 1);
  const KrigingModel m = KrigingModel::Fit(sites, targets);

  // Reordering the sites leaves predictions unchanged.
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(12);
  perm.setIdentity();
  std::mt19937_64 rng(2);
  std::shuffle(perm.indices().data(), perm.indices().data() + 12, rng);
  const KrigingModel m2 = KrigingModel::FromParameters(perm * sites, perm * targets, m.theta(), m.nugget());
  const Eigen::MatrixXd queries = Uniform(1000, 3, 22);
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    const auto a = m.Predict(queries.row(q).transpose());
    const auto b = m2.Predict(queries.row(q).transpose());
    CHECK(a.variance(0) >= 0.0);
    if (q < 50) CHECK(std::abs(a.mean(0) - b.mean(0)) < 1e-8);
  }
  for (Eigen::Index i = 0; i < 12; ++i) {
    CHECK(m.Predict(sites.row(i).transpose()).variance(0) <= 1e-6 * m.process_variance()(0));
  }
  for (Eigen::Index d = 0; d < m.theta().rows(); ++d) {
    CHECK(m.theta()(d, 0) >= 1e-3);
    CHECK(m.theta()(d, 0) <= 1e3);
  }
}

TEST_CASE("kriging errors") {
  Eigen::MatrixXd one(1, 2), t1(1, 1);
  one << 0.1, 0.2;
  t1 << 1.0;
  CHECK_ERROR_CODE(KrigingModel::Fit(one, t1), ErrorCode::kBadSites);
  Eigen::MatrixXd dup(2, 1), t2(2, 1);
  dup << 0.5, 0.5;
  t2 << 1.0, 2.0;
  CHECK_ERROR_CODE(KrigingModel::FromParameters(dup, t2, Eigen::MatrixXd::Ones(1, 1), 0.0),
                   ErrorCode::kSingularCorrelation);
  const KrigingModel m = KrigingModel::Fit(Uniform(4, 2, 1), Uniform(4, 1, 2));
  CHECK_ERROR_CODE(m.Predict(Eigen::VectorXd::Zero(3)), ErrorCode::kLengthMismatch);
}
