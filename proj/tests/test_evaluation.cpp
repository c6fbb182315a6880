#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "arraycalib/evaluation.hpp"
#include "arraycalib/rng.hpp"

using namespace arraycalib;

namespace {

PointSet random_points(Rng& rng, int d, int m, int k, double scale = 5.0) {
  PointSet x;
  x.m = m;
  x.k = k;
  x.coords.resize(d, m + k);
  for (int j = 0; j < m + k; ++j)
    for (int i = 0; i < d; ++i) x.coords(i, j) = rng.uniform(-scale, scale);
  return x;
}

// Brute-force d=2 alignment oracle: scan rotation angle (both chiralities)
// with the translation solved in closed form per angle.
double grid_alignment_error(const PointSet& est, const PointSet& tru) {
  const Eigen::VectorXd mean_est = est.coords.rowwise().mean();
  const Eigen::VectorXd mean_tru = tru.coords.rowwise().mean();
  const Eigen::MatrixXd ec = est.coords.colwise() - mean_est;
  const Eigen::MatrixXd tc = tru.coords.colwise() - mean_tru;

  // The alignment criterion is least squares; E_rs is evaluated at the
  // arg-min, so the oracle must select the angle on squared cost too.
  auto sq_cost = [&](double theta, bool reflect) {
    Eigen::Matrix2d q;
    q << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    if (reflect) q.col(1) = -q.col(1);
    return ((q * ec) - tc).squaredNorm();
  };
  auto mean_err = [&](double theta, bool reflect) {
    Eigen::Matrix2d q;
    q << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    if (reflect) q.col(1) = -q.col(1);
    return ((q * ec) - tc).colwise().norm().mean();
  };

  double best = 1e300, best_theta = 0.0;
  bool best_reflect = false;
  const double two_pi = 2.0 * 3.14159265358979323846;
  for (int refl = 0; refl < 2; ++refl)
    for (int i = 0; i < 40000; ++i) {
      const double theta = two_pi * i / 40000.0;
      const double c = sq_cost(theta, refl != 0);
      if (c < best) {
        best = c;
        best_theta = theta;
        best_reflect = refl != 0;
      }
    }
  // Refine around the best coarse angle.
  double refined_theta = best_theta;
  for (int i = -2000; i <= 2000; ++i) {
    const double theta = best_theta + i * 1e-7;
    const double c = sq_cost(theta, best_reflect);
    if (c < best) {
      best = c;
      refined_theta = theta;
    }
  }
  return mean_err(refined_theta, best_reflect);
}

}  // namespace

TEST_CASE("procrustes on identical sets returns the identity transform") {
  Rng rng(21);
  const PointSet x = random_points(rng, 3, 4, 4);
  const AlignedResult res = procrustes_align(x, x);
  CHECK((res.rotation - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff()
        <= 1e-10);
  CHECK(res.translation.cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(res.e_rs <= 1e-12);
  CHECK(res.e_r <= 1e-12);
}

TEST_CASE("procrustes recovers a reflected copy exactly") {
  Rng rng(22);
  const PointSet x = random_points(rng, 3, 5, 3);
  PointSet mirrored = x;
  mirrored.coords.row(0) = -mirrored.coords.row(0);
  const AlignedResult res = procrustes_align(mirrored, x);
  CHECK(res.e_rs <= 1e-10);
  // The recovering transform must itself be orthogonal.
  const Eigen::MatrixXd qtq = res.rotation.transpose() * res.rotation;
  CHECK((qtq - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("procrustes matches a rotation-grid oracle in 2-D") {
  Rng rng(23);
  const PointSet truth = random_points(rng, 2, 4, 4);
  PointSet est = truth;
  // Rotate, translate, and add per-point noise of about 0.01 m.
  const double theta = 0.83;
  Eigen::Matrix2d q;
  q << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  est.coords = q * est.coords;
  est.coords.colwise() += Eigen::Vector2d(0.4, -1.1);
  for (int j = 0; j < est.n(); ++j)
    for (int i = 0; i < 2; ++i) est.coords(i, j) += 0.01 * rng.normal();

  const AlignedResult res = procrustes_align(est, truth);
  const double oracle = grid_alignment_error(est, truth);
  CHECK(std::abs(res.e_rs - oracle) <= 1e-6);
  // Error should be near the injected displacement scale.
  CHECK(res.e_rs < 0.05);
  CHECK(res.e_rs > 1e-4);
}

TEST_CASE("procrustes never loses to the identity alignment") {
  Rng rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    const PointSet truth = random_points(rng, 3, 4, 5);
    PointSet est = truth;
    for (int j = 0; j < est.n(); ++j)
      for (int i = 0; i < 3; ++i) est.coords(i, j) += 0.3 * rng.normal();
    const AlignedResult res = procrustes_align(est, truth);
    const double identity_err =
        (est.coords - truth.coords).colwise().norm().mean();
    CHECK(res.e_rs <= identity_err + 1e-12);
  }
}

TEST_CASE("E_rs is invariant to a common rigid motion") {
  Rng rng(25);
  const PointSet truth = random_points(rng, 3, 4, 4);
  PointSet est = truth;
  for (int j = 0; j < est.n(); ++j)
    for (int i = 0; i < 3; ++i) est.coords(i, j) += 0.1 * rng.normal();
  const double base = procrustes_align(est, truth).e_rs;

  Eigen::MatrixXd a(3, 3);
  for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = rng.normal();
  const Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
  const Eigen::Vector3d t(0.3, 9.0, -2.0);
  PointSet est2 = est, truth2 = truth;
  est2.coords = (q * est2.coords).colwise() + t;
  truth2.coords = (q * truth2.coords).colwise() + t;
  CHECK(procrustes_align(est2, truth2).e_rs == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("localization error means over all points and receivers only") {
  PointSet truth;
  truth.m = 5;
  truth.k = 5;
  truth.coords = Eigen::MatrixXd::Zero(3, 10);
  for (int j = 0; j < 10; ++j) truth.coords(0, j) = j;

  PointSet est = truth;
  auto [e_rs0, e_r0] = localization_error(est, truth);
  CHECK(e_rs0 == doctest::Approx(0.0));
  CHECK(e_r0 == doctest::Approx(0.0));

  est.coords(1, 2) += 0.1;  // one receiver off by 0.1 m
  auto [e_rs, e_r] = localization_error(est, truth);
  CHECK(e_rs == doctest::Approx(0.01));
  CHECK(e_r == doctest::Approx(0.02));

  Rng rng(26);
  PointSet est2 = truth;
  for (int j = 0; j < 10; ++j)
    for (int i = 0; i < 3; ++i) est2.coords(i, j) += 0.05 * rng.normal();
  auto [e_rs2, e_r2] = localization_error(est2, truth);
  double acc_all = 0.0, acc_r = 0.0;
  for (int j = 0; j < 10; ++j) {
    const double e = (est2.coords.col(j) - truth.coords.col(j)).norm();
    acc_all += e;
    if (j < 5) acc_r += e;
  }
  CHECK(e_rs2 == doctest::Approx(acc_all / 10.0).epsilon(1e-12));
  CHECK(e_r2 == doctest::Approx(acc_r / 5.0).epsilon(1e-12));
}

TEST_CASE("sweep statistics clip at the floor") {
  const SweepSummary s = sweep_statistics({1e-7, 2e-8, 5e-4}, 1e-3);
  CHECK(s.median == doctest::Approx(1e-3));
  CHECK(s.q1 == doctest::Approx(1e-3));
  CHECK(s.q3 == doctest::Approx(1e-3));
  CHECK(s.outliers.empty());
}

TEST_CASE("sweep statistics: hand-computed five-sample summary") {
  const SweepSummary s =
      sweep_statistics({0.01, 0.02, 0.03, 0.04, 1.00}, 1e-3);
  CHECK(s.n == 5);
  CHECK(s.median == doctest::Approx(0.03));
  CHECK(s.q1 == doctest::Approx(0.02));
  CHECK(s.q3 == doctest::Approx(0.04));
  // Fences at q1 - 1.5 iqr = -0.01 and q3 + 1.5 iqr = 0.07.
  CHECK(s.whisker_lo == doctest::Approx(0.01));
  CHECK(s.whisker_hi == doctest::Approx(0.04));
  REQUIRE(s.outliers.size() == 1);
  CHECK(s.outliers[0] == doctest::Approx(1.00));
  // n = 5 cannot reach 95% coverage with order statistics.
  CHECK(s.ci_degenerate);
  CHECK(s.ci_lo == doctest::Approx(0.01));
  CHECK(s.ci_hi == doctest::Approx(1.00));
}

TEST_CASE("sweep statistics: order-statistic CI reaches coverage for n=20") {
  std::vector<double> errors;
  for (int i = 1; i <= 20; ++i) errors.push_back(0.01 * i);
  const SweepSummary s = sweep_statistics(errors, 1e-3);
  CHECK(!s.ci_degenerate);
  // Binomial(20, 1/2): x_(6)..x_(15) covers ~95.86%.
  CHECK(s.ci_lo == doctest::Approx(0.06));
  CHECK(s.ci_hi == doctest::Approx(0.15));
  CHECK(s.median == doctest::Approx(0.105));
}

TEST_CASE("sweep statistics degenerate cases") {
  const SweepSummary s = sweep_statistics({0.5}, 1e-3);
  CHECK(s.n == 1);
  CHECK(s.median == doctest::Approx(0.5));
  CHECK(s.ci_degenerate);

  CHECK_THROWS_AS(sweep_statistics({}, 1e-3), InvalidInputError);
}
