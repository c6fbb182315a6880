#include <algorithm>
#include <cmath>
#include <vector>

#include "arraycalib/conic.hpp"

namespace arraycalib {

namespace {

struct Scaling {
  Eigen::VectorXd d;  // row scaling
  Eigen::VectorXd e;  // column scaling
  double sigma_b = 1.0;
  double sigma_c = 1.0;
};

// Rows of one soc/rsoc/psd block must share a scaling factor or the block
// would no longer describe the same cone; average their norms.
void unify_block_rows(const std::vector<ConeBlock>& cones,
                      Eigen::VectorXd& row_norms) {
  int row = 0;
  for (const ConeBlock& blk : cones) {
    const int nr = blk.rows();
    if (blk.type != ConeType::zero && blk.type != ConeType::nonneg)
      row_norms.segment(row, nr).setConstant(row_norms.segment(row, nr).mean());
    row += nr;
  }
}

double clamp(double x, double lo, double hi) {
  return std::min(std::max(x, lo), hi);
}

// Ruiz-style equilibration: repeatedly normalize row/column infinity norms,
// then balance the right-hand side and objective against the matrix scale.
// Modifies (a, b, c) in place and returns the applied scaling.
Scaling equilibrate(Eigen::SparseMatrix<double>& a, Eigen::VectorXd& b,
                    Eigen::VectorXd& c, const std::vector<ConeBlock>& cones,
                    const AdmmConfig& cfg) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  Scaling sc;
  sc.d = Eigen::VectorXd::Ones(m);
  sc.e = Eigen::VectorXd::Ones(n);

  if (cfg.equilibrate) {
    for (int pass = 0; pass < cfg.ruiz_iterations; ++pass) {
      Eigen::VectorXd rn = Eigen::VectorXd::Zero(m);
      Eigen::VectorXd cn = Eigen::VectorXd::Zero(n);
      for (int j = 0; j < a.outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it) {
          const double v = std::abs(it.value());
          rn(it.row()) = std::max(rn(it.row()), v);
          cn(j) = std::max(cn(j), v);
        }
      unify_block_rows(cones, rn);
      Eigen::VectorXd dd(m), de(n);
      for (int i = 0; i < m; ++i)
        dd(i) = rn(i) > 0.0 ? clamp(1.0 / std::sqrt(rn(i)), 1e-4, 1e4) : 1.0;
      for (int j = 0; j < n; ++j)
        de(j) = cn(j) > 0.0 ? clamp(1.0 / std::sqrt(cn(j)), 1e-4, 1e4) : 1.0;
      for (int j = 0; j < a.outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it)
          it.valueRef() *= dd(it.row()) * de(j);
      sc.d.array() *= dd.array();
      sc.e.array() *= de.array();
    }
  }

  b = sc.d.cwiseProduct(b);
  c = sc.e.cwiseProduct(c);

  if (cfg.equilibrate) {
    Eigen::VectorXd rn2 = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd cn2 = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < a.outerSize(); ++j)
      for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it) {
        rn2(it.row()) += it.value() * it.value();
        cn2(j) += it.value() * it.value();
      }
    const double mean_row = rn2.cwiseSqrt().mean();
    const double mean_col = cn2.cwiseSqrt().mean();
    sc.sigma_b = clamp(mean_col / std::max(b.norm(), 1e-6), 1e-6, 1e6);
    sc.sigma_c = clamp(mean_row / std::max(c.norm(), 1e-6), 1e-6, 1e6);
    b *= sc.sigma_b;
    c *= sc.sigma_c;
  }
  return sc;
}

// Projection onto the dual cone K*: equality duals are free, nonneg rows
// stay nonneg, and the quadratic/semidefinite cones are self-dual.
void project_dual_cones(Eigen::Ref<Eigen::VectorXd> y,
                        const std::vector<ConeBlock>& cones) {
  int row = 0;
  for (const ConeBlock& blk : cones) {
    const int nr = blk.rows();
    switch (blk.type) {
      case ConeType::zero:
        break;
      case ConeType::nonneg:
        y.segment(row, nr) = y.segment(row, nr).cwiseMax(0.0);
        break;
      case ConeType::soc:
        project_soc(y.segment(row, nr));
        break;
      case ConeType::rsoc:
        project_rsoc(y.segment(row, nr));
        break;
      case ConeType::psd:
        project_psd_svec(y.segment(row, nr), blk.dim);
        break;
    }
    row += nr;
  }
}

}  // namespace

ConicSolution AdmmBackend::solve(const ConicProgram& program) {
  program.validate();

  Eigen::SparseMatrix<double> a = program.a;
  a.makeCompressed();
  Eigen::VectorXd b = program.b;
  Eigen::VectorXd c = program.c;
  const Scaling sc = equilibrate(a, b, c, program.cones, config_);
  const Eigen::SparseMatrix<double> at = a.transpose();

  const Eigen::SparseMatrix<double>& a0 = program.a;
  const Eigen::SparseMatrix<double> a0t = a0.transpose();
  const double b0_norm = program.b.norm();
  const double c0_norm = program.c.norm();

  const int n = static_cast<int>(a.cols());
  const int m = static_cast<int>(a.rows());

  // Factor I + A^T A once; every iteration solves the splitting system
  // through it. Dense is fine at the problem sizes this project builds.
  Eigen::MatrixXd gram = Eigen::MatrixXd(Eigen::SparseMatrix<double>(at * a));
  gram.diagonal().array() += 1.0;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw SolverError("failed to factor the splitting system");

  const auto solve0 = [&](const Eigen::VectorXd& rx, const Eigen::VectorXd& ry,
                          Eigen::VectorXd& px, Eigen::VectorXd& py) {
    px = llt.solve(rx - at * ry);
    py = ry + a * px;
  };

  Eigen::VectorXd qx, qy;
  solve0(c, b, qx, qy);
  const double denom = 1.0 + c.dot(qx) + b.dot(qy);  // provably >= 1

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n + m + 1);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n + m + 1);
  u(n + m) = 1.0;  // tau
  v(n + m) = 1.0;  // kappa

  ConicSolution out;
  out.x = Eigen::VectorXd::Zero(n);
  out.y = Eigen::VectorXd::Zero(m);
  out.s = Eigen::VectorXd::Zero(m);
  bool have_candidate = false;

  Eigen::VectorXd px, py, ut(n + m + 1), w2(n + m + 1);
  const double alpha = config_.over_relaxation;

  for (int iter = 1; iter <= config_.max_iterations; ++iter) {
    const Eigen::VectorXd w = u + v;
    solve0(w.head(n), w.segment(n, m), px, py);
    const double ztau = (w(n + m) + c.dot(px) + b.dot(py)) / denom;
    ut.head(n) = px - ztau * qx;
    ut.segment(n, m) = py - ztau * qy;
    ut(n + m) = ztau;

    w2 = alpha * ut + (1.0 - alpha) * u;  // over-relaxed point
    Eigen::VectorXd unew = w2 - v;
    project_dual_cones(unew.segment(n, m), program.cones);
    unew(n + m) = std::max(unew(n + m), 0.0);
    v += unew - w2;
    u = unew;

    const bool last = iter == config_.max_iterations;
    if (iter % config_.check_interval != 0 && !last) continue;

    const double tau = u(n + m);
    if (tau > 1e-12) {
      // Candidate primal/dual pair in the original (unscaled) problem.
      out.x = sc.e.cwiseProduct(u.head(n)) / (tau * sc.sigma_b);
      out.y = sc.d.cwiseProduct(u.segment(n, m)) / (tau * sc.sigma_c);
      out.s = v.segment(n, m).cwiseQuotient(sc.d) / (tau * sc.sigma_b);
      out.iterations = iter;
      out.primal_residual =
          (a0 * out.x + out.s - program.b).norm() / (1.0 + b0_norm);
      out.dual_residual =
          (a0t * out.y + program.c).norm() / (1.0 + c0_norm);
      const double ctx = program.c.dot(out.x);
      const double bty = program.b.dot(out.y);
      out.duality_gap =
          std::abs(ctx + bty) / (1.0 + std::abs(ctx) + std::abs(bty));
      out.objective = ctx;
      have_candidate = true;

      if (out.primal_residual < config_.eps_optimal &&
          out.dual_residual < config_.eps_optimal &&
          out.duality_gap < config_.eps_optimal) {
        out.status = ConicStatus::optimal;
        return out;
      }
    }

    // Certificate checks. A dual direction with b'y < 0 and A'y ~ 0 proves
    // primal infeasibility; a primal direction with c'x < 0 and Ax + s ~ 0
    // proves unboundedness. Both tests are scale invariant.
    const Eigen::VectorXd ycert = sc.d.cwiseProduct(u.segment(n, m));
    const double bty_cert = program.b.dot(ycert);
    if (bty_cert < -1e-12) {
      const double quality =
          (a0t * ycert).norm() * b0_norm / (-bty_cert);
      if (quality < config_.eps_optimal) {
        out.status = ConicStatus::infeasible;
        out.y = ycert / (-bty_cert);
        out.iterations = iter;
        return out;
      }
    }
    const Eigen::VectorXd xcert = sc.e.cwiseProduct(u.head(n));
    const double ctx_cert = program.c.dot(xcert);
    if (ctx_cert < -1e-12) {
      const Eigen::VectorXd scert = v.segment(n, m).cwiseQuotient(sc.d);
      const double quality =
          (a0 * xcert + scert).norm() * c0_norm / (-ctx_cert);
      if (quality < config_.eps_optimal) {
        out.status = ConicStatus::unbounded;
        out.x = xcert / (-ctx_cert);
        out.iterations = iter;
        return out;
      }
    }
  }

  if (have_candidate && out.primal_residual <= config_.eps_near &&
      out.dual_residual <= config_.eps_near &&
      out.duality_gap <= config_.eps_near) {
    out.status = ConicStatus::near_optimal;
  } else {
    out.status = ConicStatus::failed;
  }
  return out;
}

}  // namespace arraycalib
