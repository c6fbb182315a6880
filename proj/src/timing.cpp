#include "arraycalib/timing.hpp"

#include <vector>

namespace arraycalib {

TimingEstimate recover_timing(const Eigen::MatrixXd& delta_hat,
                              const ToaMatrix& t) {
  t.validate();
  const int m = t.m(), k = t.k();
  if (delta_hat.rows() != m || delta_hat.cols() != k)
    throw InvalidInputError("distance matrix shape does not match the TOAs");

  std::vector<std::pair<int, int>> observed;
  observed.reserve(static_cast<std::size_t>(m) * k);
  for (int kk = 0; kk < k; ++kk)
    for (int mm = 0; mm < m; ++mm)
      if (t.mask(mm, kk)) observed.emplace_back(mm, kk);

  const int unknowns = m - 1 + k;  // sigma(0) is pinned
  const int rows = static_cast<int>(observed.size());
  if (rows < unknowns)
    throw SolverError("timing system is underdetermined for this mask");

  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(rows, unknowns);
  Eigen::VectorXd rhs(rows);
  for (int i = 0; i < rows; ++i) {
    const auto [mm, kk] = observed[static_cast<std::size_t>(i)];
    if (mm > 0) design(i, mm - 1) = 1.0;
    design(i, m - 1 + kk) = 1.0;
    rhs(i) = t.t(mm, kk) - delta_hat(mm, kk) / t.speed;
  }

  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  if (cod.rank() < unknowns)
    throw SolverError("timing system is underdetermined for this mask");
  const Eigen::VectorXd sol = cod.solve(rhs);

  TimingEstimate est;
  est.sigma = Eigen::VectorXd::Zero(m);
  est.sigma.tail(m - 1) = sol.head(m - 1);
  est.tau = sol.tail(k);
  est.residual_norm = (design * sol - rhs).norm();
  return est;
}

}  // namespace arraycalib
