#include "arraycalib/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace arraycalib {

Eigen::MatrixXd centering_matrix(int l) {
  if (l < 1) throw InvalidInputError("centering matrix size must be >= 1");
  Eigen::MatrixXd j = Eigen::MatrixXd::Identity(l, l);
  j.array() -= 1.0 / static_cast<double>(l);
  return j;
}

Eigen::MatrixXd cross_distances(const PointSet& x) {
  Eigen::MatrixXd delta(x.m, x.k);
  auto r = x.receivers();
  auto s = x.sources();
  for (int mm = 0; mm < x.m; ++mm)
    for (int kk = 0; kk < x.k; ++kk)
      delta(mm, kk) = (r.col(mm) - s.col(kk)).norm();
  return delta;
}

GramMatrix gram_from_points(const PointSet& x, bool center) {
  Eigen::MatrixXd coords = x.coords;
  if (center) coords.colwise() -= coords.rowwise().mean();
  GramMatrix g;
  g.g = coords.transpose() * coords;
  g.m = x.m;
  g.k = x.k;
  return g;
}

Eigen::MatrixXd edm_from_gram(const GramMatrix& g) {
  const Eigen::VectorXd d = g.g.diagonal();
  const int n = g.n();
  return d.replicate(1, n) - 2.0 * g.g + d.transpose().replicate(n, 1);
}

Eigen::MatrixXd cross_block(const GramMatrix& g) {
  // S_row D(G) S_col without forming the full EDM.
  const Eigen::VectorXd d = g.g.diagonal();
  const int m = g.m, k = g.k;
  Eigen::MatrixXd lg(m, k);
  for (int mm = 0; mm < m; ++mm)
    for (int kk = 0; kk < k; ++kk)
      lg(mm, kk) = d(mm) + d(m + kk) - 2.0 * g.g(mm, m + kk);
  return lg;
}

namespace {

// Eigendecomposition with eigenvalues reordered descending and a
// deterministic sign convention per eigenvector.
void sorted_eig(const Eigen::MatrixXd& sym, Eigen::VectorXd& values,
                Eigen::MatrixXd& vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success)
    throw SolverError("eigendecomposition failed");
  const int n = static_cast<int>(sym.rows());
  values.resize(n);
  vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    // Eigen reports ascending order; reverse it.
    const int src = n - 1 - i;
    values(i) = eig.eigenvalues()(src);
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    int arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    vectors.col(i) = v;
  }
}

}  // namespace

PointSet points_from_gram(const GramMatrix& g, int d) {
  const int n = g.n();
  if (d < 1 || d > n)
    throw InvalidInputError("embedding dimension exceeds point count");
  Eigen::MatrixXd sym = 0.5 * (g.g + g.g.transpose());
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  sorted_eig(sym, values, vectors);
  PointSet x;
  x.m = g.m;
  x.k = g.k;
  x.coords.resize(d, n);
  for (int i = 0; i < d; ++i) {
    const double lambda = std::max(values(i), 0.0);
    x.coords.row(i) = std::sqrt(lambda) * vectors.col(i).transpose();
  }
  return x;
}

Eigen::VectorXd gram_eigenvalues(const GramMatrix& g) {
  Eigen::MatrixXd sym = 0.5 * (g.g + g.g.transpose());
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  sorted_eig(sym, values, vectors);
  return values;
}

double gram_tail_mass(const GramMatrix& g, int d) {
  const Eigen::VectorXd values = gram_eigenvalues(g).cwiseAbs();
  const double total = values.sum();
  if (total <= 0.0) return 0.0;
  double tail = 0.0;
  for (int i = d; i < values.size(); ++i) tail += values(i);
  return tail / total;
}

}  // namespace arraycalib
