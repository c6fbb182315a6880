#include "arraycalib/conic.hpp"

#include <cmath>

namespace arraycalib {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;
}

void ConicProgram::validate() const {
  if (c.size() < 1) throw InvalidInputError("conic program has no variables");
  if (a.rows() != b.size())
    throw InvalidInputError("constraint matrix and rhs row counts differ");
  if (a.cols() != c.size())
    throw InvalidInputError("constraint matrix and objective sizes differ");
  int rows = 0;
  for (const ConeBlock& blk : cones) {
    if (blk.dim < 1) throw InvalidInputError("cone block with no rows");
    if (blk.type == ConeType::soc && blk.dim < 2)
      throw InvalidInputError("second-order cone needs at least two rows");
    if (blk.type == ConeType::rsoc && blk.dim < 3)
      throw InvalidInputError("rotated cone needs at least three rows");
    rows += blk.rows();
  }
  if (rows != b.size())
    throw InvalidInputError("cone blocks do not tile the constraint rows");
  if (!b.allFinite() || !c.allFinite())
    throw InvalidInputError("conic program data must be finite");
}

const char* to_string(ConicStatus status) {
  switch (status) {
    case ConicStatus::optimal: return "optimal";
    case ConicStatus::near_optimal: return "near_optimal";
    case ConicStatus::infeasible: return "infeasible";
    case ConicStatus::unbounded: return "unbounded";
    case ConicStatus::failed: return "failed";
  }
  return "failed";
}

int svec_size(int order) { return order * (order + 1) / 2; }

Eigen::VectorXd svec(const Eigen::MatrixXd& s) {
  const int n = static_cast<int>(s.rows());
  if (s.cols() != n) throw InvalidInputError("svec needs a square matrix");
  Eigen::VectorXd v(svec_size(n));
  int idx = 0;
  for (int j = 0; j < n; ++j) {
    v(idx++) = s(j, j);
    for (int i = j + 1; i < n; ++i) v(idx++) = kSqrt2 * s(i, j);
  }
  return v;
}

Eigen::MatrixXd unsvec(const Eigen::VectorXd& v, int order) {
  if (v.size() != svec_size(order))
    throw InvalidInputError("svec length does not match the matrix order");
  Eigen::MatrixXd s(order, order);
  int idx = 0;
  for (int j = 0; j < order; ++j) {
    s(j, j) = v(idx++);
    for (int i = j + 1; i < order; ++i) {
      s(i, j) = v(idx) / kSqrt2;
      s(j, i) = s(i, j);
      ++idx;
    }
  }
  return s;
}

void project_soc(Eigen::Ref<Eigen::VectorXd> v) {
  const int n = static_cast<int>(v.size());
  const double t = v(0);
  const double z = n > 1 ? v.tail(n - 1).norm() : 0.0;
  if (z <= t) return;          // already inside
  if (z <= -t) {               // polar cone: projects to the origin
    v.setZero();
    return;
  }
  const double rho = 0.5 * (t + z);
  v.tail(n - 1) *= rho / z;
  v(0) = rho;
}

void project_rsoc(Eigen::Ref<Eigen::VectorXd> v) {
  // Rotate (u, v, w) -> ((u+v)/sqrt2, (u-v)/sqrt2, w), which carries the
  // rotated cone onto the second-order cone, project there, rotate back.
  const double a = v(0);
  const double b = v(1);
  v(0) = (a + b) / kSqrt2;
  v(1) = (a - b) / kSqrt2;
  project_soc(v);
  const double t = v(0);
  const double z = v(1);
  v(0) = (t + z) / kSqrt2;
  v(1) = (t - z) / kSqrt2;
}

void project_psd_svec(Eigen::Ref<Eigen::VectorXd> v, int order) {
  if (order == 1) {
    v(0) = std::max(v(0), 0.0);
    return;
  }
  const Eigen::MatrixXd s = unsvec(v, order);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd proj =
      eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
  v = svec(proj);
}

}  // namespace arraycalib
