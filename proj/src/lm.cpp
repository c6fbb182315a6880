#include "arraycalib/lm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arraycalib/geometry.hpp"
#include "arraycalib/toa_model.hpp"

namespace arraycalib {

namespace {

constexpr double kDampingCeiling = 1e15;

int infer_dim(Eigen::Index theta_size, int m, int k, int n_missing) {
  const Eigen::Index pos = theta_size - n_missing;
  if (pos <= 0 || pos % (m + k) != 0)
    throw InvalidInputError("theta length does not fit d(M+K) + missing");
  return static_cast<int>(pos / (m + k));
}

// Objective with an optional quadratic penalty term; equalities empty means
// plain data misfit.
struct Objective {
  const ToaMatrix& t;
  SyncMode mode;
  const std::vector<DistanceEquality>& equalities;
  double mu = 0.0;
  Eigen::VectorXd z;  // multipliers, one per equality
  double distance_floor;
  int n_missing = 0;

  int m() const { return t.m(); }
  int k() const { return t.k(); }

  // Half squared norm of the stacked weighted residual.
  double value(const Eigen::VectorXd& theta) const {
    double v = 0.5 * residual(theta, t, mode).squaredNorm();
    if (!equalities.empty()) {
      const Eigen::VectorXd g =
          constraint_values(theta, m(), k(), n_missing, equalities);
      v += 0.5 * mu * (g + z / (2.0 * mu)).squaredNorm();
    }
    return v;
  }

  // Gradient and Gauss-Newton matrix of value().
  void derivatives(const Eigen::VectorXd& theta, Eigen::VectorXd& grad,
                   Eigen::MatrixXd& gn, int* near_coincident) const {
    const Eigen::VectorXd f = residual(theta, t, mode);
    const Eigen::MatrixXd df =
        jacobian(theta, t, mode, distance_floor, near_coincident);
    grad = df.transpose() * f;
    gn = df.transpose() * df;
    if (!equalities.empty()) {
      const Eigen::VectorXd g =
          constraint_values(theta, m(), k(), n_missing, equalities);
      const Eigen::MatrixXd dg =
          constraint_jacobian(theta, m(), k(), n_missing, equalities);
      grad += mu * dg.transpose() * (g + z / (2.0 * mu));
      gn += mu * dg.transpose() * dg;
    }
  }
};

// Shared damped-step loop. Returns the refined theta; fills the report's
// iteration counts and traces (final_loss is set by the caller, which knows
// whether the objective carries a penalty term).
Eigen::VectorXd lm_loop(const Objective& obj, Eigen::VectorXd theta,
                        const LmConfig& cfg, RefineReport& report) {
  if (!theta.allFinite())
    throw InvalidInputError("starting point must be finite");
  double current = obj.value(theta);
  if (!std::isfinite(current))
    throw SolverError("loss is not finite at the starting point");

  double damping = cfg.initial_damping;
  const int n = static_cast<int>(theta.size());
  Eigen::VectorXd grad(n);
  Eigen::MatrixXd gn(n, n);
  report.loss_trace.clear();
  report.damping_trace.clear();
  report.converged = false;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    obj.derivatives(theta, grad, gn, &report.near_coincident_events);
    report.gradient_norm = grad.norm();
    if (report.gradient_norm <= cfg.gradient_tolerance) {
      report.converged = true;
      return theta;
    }

    bool accepted = false;
    while (damping <= kDampingCeiling) {
      Eigen::MatrixXd damped = gn;
      damped.diagonal().array() += damping;
      const Eigen::LLT<Eigen::MatrixXd> llt(damped);
      if (llt.info() != Eigen::Success) {
        damping *= cfg.damping_increase;
        continue;
      }
      const Eigen::VectorXd trial = theta - llt.solve(grad);
      const double trial_value = obj.value(trial);
      if (trial_value < current) {  // NaN trials fail this and are retried
        theta = trial;
        const double drop = current - trial_value;
        current = trial_value;
        damping *= cfg.damping_decrease;
        ++report.iterations;
        report.loss_trace.push_back(current);
        report.damping_trace.push_back(damping);
        accepted = true;
        if (drop <= cfg.relative_loss_tolerance *
                        std::max(current, std::numeric_limits<double>::min()))
          report.converged = true;
        break;
      }
      damping *= cfg.damping_increase;
    }
    if (!accepted || report.converged) {
      // No decrease found at any damping: a (possibly local) minimum.
      obj.derivatives(theta, grad, gn, &report.near_coincident_events);
      report.gradient_norm = grad.norm();
      return theta;
    }
  }
  return theta;
}

}  // namespace

void LmConfig::validate() const {
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(initial_damping > 0.0) || !(damping_increase > 1.0) ||
      !(damping_decrease > 0.0) || damping_decrease >= 1.0)
    throw ConfigError("damping schedule must increase and decrease");
  if (!(gradient_tolerance > 0.0) || !(relative_loss_tolerance > 0.0) ||
      !(distance_floor > 0.0))
    throw ConfigError("tolerances must be positive");
}

void AugLagConfig::validate() const {
  if (!(penalty > 0.0) || !(penalty_growth > 1.0) ||
      !(penalty_cap >= penalty))
    throw ConfigError("penalty schedule invalid");
  if (outer_iterations < 1) throw ConfigError("outer_iterations must be >= 1");
  if (!(constraint_tolerance > 0.0))
    throw ConfigError("constraint_tolerance must be positive");
}

Eigen::VectorXd pack_theta(const PointSet& x, const Eigen::VectorXd& alpha) {
  Eigen::VectorXd theta(x.coords.size() + alpha.size());
  theta.head(x.coords.size()) =
      Eigen::Map<const Eigen::VectorXd>(x.coords.data(), x.coords.size());
  theta.tail(alpha.size()) = alpha;
  return theta;
}

PointSet unpack_points(const Eigen::VectorXd& theta, int m, int k,
                       int n_missing) {
  const int d = infer_dim(theta.size(), m, k, n_missing);
  PointSet x;
  x.m = m;
  x.k = k;
  x.coords = Eigen::Map<const Eigen::MatrixXd>(theta.data(), d, m + k);
  return x;
}

Eigen::VectorXd unpack_alpha(const Eigen::VectorXd& theta, int n_missing) {
  return theta.tail(n_missing);
}

Eigen::VectorXd residual(const Eigen::VectorXd& theta, const ToaMatrix& t,
                         SyncMode mode) {
  const int n_missing = static_cast<int>(t.missing_indices().size());
  const PointSet x = unpack_points(theta, t.m(), t.k(), n_missing);
  const Eigen::MatrixXd r =
      residual_matrix(x, t, mode, unpack_alpha(theta, n_missing));
  return Eigen::Map<const Eigen::VectorXd>(r.data(), r.size());
}

Eigen::MatrixXd jacobian(const Eigen::VectorXd& theta, const ToaMatrix& t,
                         SyncMode mode, double distance_floor,
                         int* near_coincident) {
  const int m = t.m(), k = t.k();
  const auto missing = t.missing_indices();
  const int n_missing = static_cast<int>(missing.size());
  const int d = infer_dim(theta.size(), m, k, n_missing);
  const PointSet x = unpack_points(theta, m, k, n_missing);

  // Unprojected rows first: row (m,k) touches only receiver m's and source
  // k's coordinates through the unit direction, and its own alpha column.
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(m * k, theta.size());
  for (int kk = 0; kk < k; ++kk)
    for (int mm = 0; mm < m; ++mm) {
      const Eigen::VectorXd diff =
          x.coords.col(mm) - x.coords.col(m + kk);
      const double dist = diff.norm();
      const int row = kk * m + mm;
      if (dist < distance_floor) {
        if (near_coincident != nullptr) ++(*near_coincident);
        continue;  // direction undefined at coincidence; leave the row zero
      }
      j.block(row, d * mm, 1, d) = diff.transpose() / dist;
      j.block(row, d * (m + kk), 1, d) = -diff.transpose() / dist;
    }
  for (int i = 0; i < n_missing; ++i)
    j(missing[static_cast<std::size_t>(i)].second * m +
          missing[static_cast<std::size_t>(i)].first,
      d * (m + k) + i) = 1.0;

  // The projection acts on the measurement index: center each column as an
  // M x K matrix.
  for (Eigen::Index c = 0; c < j.cols(); ++c) {
    const Eigen::MatrixXd col =
        Eigen::Map<const Eigen::MatrixXd>(j.col(c).data(), m, k);
    const Eigen::MatrixXd projected = timing_invariant_projection(col, mode);
    j.col(c) = Eigen::Map<const Eigen::VectorXd>(projected.data(), m * k);
  }
  return j;
}

Eigen::VectorXd constraint_values(
    const Eigen::VectorXd& theta, int m, int k, int n_missing,
    const std::vector<DistanceEquality>& equalities) {
  const int d = infer_dim(theta.size(), m, k, n_missing);
  const Eigen::Map<const Eigen::MatrixXd> coords(theta.data(), d, m + k);
  Eigen::VectorXd g(static_cast<Eigen::Index>(equalities.size()));
  for (std::size_t i = 0; i < equalities.size(); ++i) {
    const auto& eq = equalities[i];
    g(static_cast<Eigen::Index>(i)) =
        (coords.col(eq.i) - coords.col(eq.j)).squaredNorm() -
        eq.value * eq.value;
  }
  return g;
}

Eigen::MatrixXd constraint_jacobian(
    const Eigen::VectorXd& theta, int m, int k, int n_missing,
    const std::vector<DistanceEquality>& equalities) {
  const int d = infer_dim(theta.size(), m, k, n_missing);
  const Eigen::Map<const Eigen::MatrixXd> coords(theta.data(), d, m + k);
  Eigen::MatrixXd dg = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(equalities.size()), theta.size());
  for (std::size_t i = 0; i < equalities.size(); ++i) {
    const auto& eq = equalities[i];
    const Eigen::VectorXd diff = coords.col(eq.i) - coords.col(eq.j);
    dg.block(static_cast<Eigen::Index>(i), d * eq.i, 1, d) =
        2.0 * diff.transpose();
    dg.block(static_cast<Eigen::Index>(i), d * eq.j, 1, d) =
        -2.0 * diff.transpose();
  }
  return dg;
}

std::pair<Eigen::VectorXd, RefineReport> lm_minimize(
    const Eigen::VectorXd& theta0, const ToaMatrix& t, SyncMode mode,
    const LmConfig& config) {
  config.validate();
  t.validate();
  static const std::vector<DistanceEquality> kNoEqualities;
  Objective obj{t, mode, kNoEqualities, 0.0, Eigen::VectorXd(),
                config.distance_floor};
  RefineReport report;
  Eigen::VectorXd theta = lm_loop(obj, theta0, config, report);
  report.final_loss = 0.5 * residual(theta, t, mode).squaredNorm();
  return {std::move(theta), std::move(report)};
}

std::pair<Eigen::VectorXd, RefineReport> lm_minimize_constrained(
    const Eigen::VectorXd& theta0, const ToaMatrix& t, SyncMode mode,
    const std::vector<DistanceEquality>& equalities, const LmConfig& lm,
    const AugLagConfig& al) {
  lm.validate();
  al.validate();
  t.validate();
  if (equalities.empty())
    throw InvalidInputError("constrained refinement needs equalities");
  for (const auto& eq : equalities)
    if (eq.i < 0 || eq.i >= t.m() + t.k() || eq.j < 0 ||
        eq.j >= t.m() + t.k() || eq.i == eq.j || !(eq.value >= 0.0))
      throw InvalidInputError("distance equality indices invalid");

  const int n_missing = static_cast<int>(t.missing_indices().size());
  Objective obj{t,
                mode,
                equalities,
                al.penalty,
                Eigen::VectorXd::Zero(
                    static_cast<Eigen::Index>(equalities.size())),
                lm.distance_floor,
                n_missing};
  Eigen::VectorXd theta = theta0;
  RefineReport report;
  std::vector<double> constraint_trace;
  int total_accepted = 0;
  int coincident = 0;
  bool constraints_met = false;
  for (int outer = 0; outer < al.outer_iterations; ++outer) {
    RefineReport inner;
    theta = lm_loop(obj, theta, lm, inner);
    total_accepted += inner.iterations;
    coincident += inner.near_coincident_events;
    report = std::move(inner);
    const Eigen::VectorXd g =
        constraint_values(theta, t.m(), t.k(), n_missing, equalities);
    const double worst = g.cwiseAbs().maxCoeff();
    constraint_trace.push_back(worst);
    if (worst < al.constraint_tolerance) {
      constraints_met = true;
      break;
    }
    obj.z += 2.0 * obj.mu * g;
    obj.mu = std::min(obj.mu * al.penalty_growth, al.penalty_cap);
  }
  report.constraint_trace = std::move(constraint_trace);
  report.converged = constraints_met;
  report.iterations = total_accepted;
  report.near_coincident_events = coincident;
  report.final_loss = 0.5 * residual(theta, t, mode).squaredNorm();
  return {std::move(theta), std::move(report)};
}

}  // namespace arraycalib
