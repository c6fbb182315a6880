#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "arraycalib/evaluation.hpp"
#include "arraycalib/geometry.hpp"
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

}  // namespace

TEST_CASE("centering matrix matches its closed form and is a projection") {
  const Eigen::MatrixXd j1 = centering_matrix(1);
  CHECK(j1.rows() == 1);
  CHECK(j1(0, 0) == doctest::Approx(0.0));

  const Eigen::MatrixXd j2 = centering_matrix(2);
  CHECK(j2(0, 0) == doctest::Approx(0.5));
  CHECK(j2(0, 1) == doctest::Approx(-0.5));
  CHECK(j2(1, 0) == doctest::Approx(-0.5));
  CHECK(j2(1, 1) == doctest::Approx(0.5));

  const Eigen::MatrixXd j5 = centering_matrix(5);
  CHECK((j5.rowwise().sum()).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((j5 * j5 - j5).cwiseAbs().maxCoeff() <= 1e-14);

  for (int l = 1; l <= 50; ++l) {
    const Eigen::MatrixXd j = centering_matrix(l);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(l);
    CHECK((j * ones).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((ones.transpose() * j).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((j * j - j).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((j - j.transpose()).cwiseAbs().maxCoeff() <= 1e-13);
  }

  CHECK_THROWS_AS(centering_matrix(0), InvalidInputError);
}

TEST_CASE("cross distances: 3-4-5 triangle and coincident pair") {
  PointSet x;
  x.m = 1;
  x.k = 1;
  x.coords.resize(2, 2);
  x.coords << 0.0, 3.0, 0.0, 4.0;
  const Eigen::MatrixXd delta = cross_distances(x);
  CHECK(delta(0, 0) == doctest::Approx(5.0));

  x.coords << 1.0, 1.0, -2.0, -2.0;
  CHECK(cross_distances(x)(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("cross distances agree with sqrt of the Gram cross block") {
  Rng rng(11);
  const PointSet x = random_points(rng, 3, 2, 3);
  const Eigen::MatrixXd delta = cross_distances(x);
  const Eigen::MatrixXd lg = cross_block(gram_from_points(x));
  // Independent oracle: per-pair norms computed directly.
  for (int mm = 0; mm < x.m; ++mm)
    for (int kk = 0; kk < x.k; ++kk) {
      double acc = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double diff = x.coords(i, mm) - x.coords(i, x.m + kk);
        acc += diff * diff;
      }
      CHECK(delta(mm, kk) == doctest::Approx(std::sqrt(acc)).epsilon(1e-12));
      CHECK(lg(mm, kk) == doctest::Approx(acc).epsilon(1e-10));
    }
}

TEST_CASE("cross distances are invariant under rigid motions") {
  Rng rng(12);
  const PointSet x = random_points(rng, 3, 4, 5);
  const Eigen::MatrixXd delta = cross_distances(x);

  // Random rotation from QR of a Gaussian matrix, plus a translation.
  Eigen::MatrixXd a(3, 3);
  for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = rng.normal();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a)
                                .householderQ();
  Eigen::VectorXd t(3);
  t << 1.7, -0.3, 2.2;

  PointSet moved = x;
  moved.coords = (q * x.coords).colwise() + t;
  CHECK((cross_distances(moved) - delta).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gram matrix of a single point and centering behavior") {
  PointSet x;
  x.m = 1;
  x.k = 0;
  x.coords = Eigen::MatrixXd::Zero(2, 1);
  const GramMatrix g = gram_from_points(x, false);
  CHECK(g.g.rows() == 1);
  CHECK(g.g(0, 0) == doctest::Approx(0.0));

  Rng rng(13);
  const PointSet y = random_points(rng, 3, 5, 4);
  const GramMatrix gc = gram_from_points(y, true);
  CHECK((gc.g * Eigen::VectorXd::Ones(gc.n())).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("gram matrix has exactly d significant eigenvalues") {
  Rng rng(14);
  const PointSet x = random_points(rng, 3, 6, 6);
  const Eigen::VectorXd ev = gram_eigenvalues(gram_from_points(x));
  CHECK(ev(2) > 1.0);          // generic random set spans 3 dimensions
  CHECK(std::abs(ev(3)) <= 1e-9 * ev(0));
}

TEST_CASE("EDM from Gram matches brute-force squared distances") {
  const GramMatrix zero{Eigen::MatrixXd::Zero(3, 3), 2, 1};
  CHECK(edm_from_gram(zero).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  PointSet two;
  two.m = 1;
  two.k = 1;
  two.coords.resize(2, 2);
  two.coords << 0.0, 5.0, 0.0, 0.0;
  const Eigen::MatrixXd d2 = edm_from_gram(gram_from_points(two));
  CHECK(d2(0, 1) == doctest::Approx(25.0));
  CHECK(d2(1, 0) == doctest::Approx(25.0));

  Rng rng(15);
  const PointSet x = random_points(rng, 3, 4, 4);
  const Eigen::MatrixXd edm = edm_from_gram(gram_from_points(x));
  for (int i = 0; i < x.n(); ++i)
    for (int j = 0; j < x.n(); ++j) {
      const double sq = (x.coords.col(i) - x.coords.col(j)).squaredNorm();
      CHECK(edm(i, j) == doctest::Approx(sq).epsilon(1e-10));
    }
}

TEST_CASE("cross block: coincident pair and translation invariance") {
  PointSet x;
  x.m = 1;
  x.k = 1;
  x.coords.resize(2, 2);
  x.coords << 2.0, 2.0, -1.0, -1.0;
  CHECK(cross_block(gram_from_points(x))(0, 0) == doctest::Approx(0.0));

  Rng rng(16);
  PointSet y = random_points(rng, 3, 3, 4);
  const Eigen::MatrixXd before = cross_block(gram_from_points(y));
  y.coords.colwise() += Eigen::Vector3d(10.0, -4.0, 0.5);
  const Eigen::MatrixXd after = cross_block(gram_from_points(y));
  CHECK((before - after).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("points_from_gram round-trips a centered point set") {
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const int m = 3 + static_cast<int>(rng.below(10));
    const int k = 3 + static_cast<int>(rng.below(10));
    const PointSet x = random_points(rng, 3, m, k);
    const PointSet rec = points_from_gram(gram_from_points(x), 3);
    const AlignedResult res = procrustes_align(rec, x);
    CHECK(res.e_rs <= 1e-9);
  }
}

TEST_CASE("points_from_gram on a planar set embedded in 3-D") {
  Rng rng(18);
  PointSet x = random_points(rng, 3, 4, 4);
  x.coords.row(2).setZero();
  const PointSet rec = points_from_gram(gram_from_points(x), 3);
  CHECK(rec.coords.row(2).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("points_from_gram tolerates a non-centered Gram matrix") {
  const GramMatrix g{Eigen::MatrixXd::Identity(2, 2), 1, 1};
  const PointSet rec = points_from_gram(g, 2);
  CHECK(rec.n() == 2);
  const Eigen::MatrixXd gram_back = rec.coords.transpose() * rec.coords;
  CHECK(gram_back(0, 0) == doctest::Approx(1.0));
  CHECK(gram_back(1, 1) == doctest::Approx(1.0));

  CHECK_THROWS_AS(points_from_gram(g, 3), InvalidInputError);
}

TEST_CASE("tail mass vanishes for exact rank-d Gram matrices") {
  Rng rng(19);
  const PointSet x = random_points(rng, 2, 5, 5);
  const GramMatrix g = gram_from_points(x);
  CHECK(gram_tail_mass(g, 2) <= 1e-8);
  CHECK(gram_tail_mass(g, 1) > 0.01);
}
