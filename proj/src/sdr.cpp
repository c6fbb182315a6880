#include "arraycalib/sdr.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "arraycalib/geometry.hpp"
#include "arraycalib/toa_model.hpp"

namespace arraycalib {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

// Column index of G_ij (i >= j) within the column-major lower-triangle
// svec layout of an order-n symmetric matrix.
int svec_index(int n, int i, int j) {
  if (i < j) std::swap(i, j);
  return j * n - j * (j - 1) / 2 + (i - j);
}

// Appends the svec coefficients of the squared distance
// D(G)_ij = G_ii + G_jj - 2 G_ij, scaled by `scale`.
void add_sqdist_coeffs(std::vector<Eigen::Triplet<double>>& trips, int row,
                       int n, int i, int j, double scale) {
  trips.emplace_back(row, svec_index(n, i, i), scale);
  trips.emplace_back(row, svec_index(n, j, j), scale);
  trips.emplace_back(row, svec_index(n, i, j), -kSqrt2 * scale);
}

}  // namespace

void SdrProblem::validate() const {
  if (m < 1 || k < 1) throw InvalidInputError("need at least one of each");
  if (d < 1 || d > 3) throw InvalidInputError("dimension must be 1, 2, or 3");
  if (n() < d + 1)
    throw InvalidInputError("too few points for the requested dimension");
  if (target.rows() != m || target.cols() != k)
    throw InvalidInputError("target size does not match m x k");
  if (!target.allFinite())
    throw InvalidInputError("target must be finite everywhere");
  std::set<std::pair<int, int>> seen;
  for (const auto& [mm, kk] : missing) {
    if (mm < 0 || mm >= m || kk < 0 || kk >= k)
      throw InvalidInputError("missing index out of range");
    if (!seen.insert({mm, kk}).second)
      throw InvalidInputError("duplicate missing index");
  }
  for (const auto& eq : distance_equalities) {
    if (eq.i < 0 || eq.i >= n() || eq.j < 0 || eq.j >= n() || eq.i == eq.j)
      throw InvalidInputError("distance equality indices invalid");
    if (!(eq.value >= 0.0) || !std::isfinite(eq.value))
      throw InvalidInputError("distance equality value invalid");
  }
  for (const auto& bd : distance_bounds) {
    if (bd.i < 0 || bd.i >= n() || bd.j < 0 || bd.j >= n() || bd.i == bd.j)
      throw InvalidInputError("distance bound indices invalid");
    if (!(0.0 <= bd.lower) || !(bd.lower <= bd.upper))
      throw InvalidInputError("distance bound interval invalid");
  }
}

SdrProblem make_sdr_problem(const ToaMatrix& t, int d, SyncMode mode,
                            std::vector<DistanceEquality> equalities,
                            std::vector<DistanceBound> bounds) {
  t.validate();
  SdrProblem p;
  p.m = t.m();
  p.k = t.k();
  p.d = d;
  p.target = target_meters(t);
  p.mode = mode;
  p.missing = t.missing_indices();
  p.distance_equalities = std::move(equalities);
  p.distance_bounds = std::move(bounds);
  p.validate();
  return p;
}

ConicProgram build(const SdrProblem& p) {
  p.validate();
  const int m = p.m, k = p.k, nn = p.n();
  const int n_svec = svec_size(nn);
  const int nb = m * k;
  const int n_miss = static_cast<int>(p.missing.size());
  const int n_eq = static_cast<int>(p.distance_equalities.size());
  const int n_bd = static_cast<int>(p.distance_bounds.size());

  const int col_b = n_svec;          // b_mk at col_b + kk * m + mm
  const int col_alpha = n_svec + nb;
  const int col_epi = n_svec + nb + n_miss;
  const int n_vars = col_epi + 1;

  const int rows_zero = nn + n_eq;
  const int rows_nonneg = nb + 2 * n_bd;
  const int rows_rsoc = 3 * nb;
  const int rows_soc = 1 + nb;
  const int rows_psd = n_svec;
  const int n_rows = rows_zero + rows_nonneg + rows_rsoc + rows_soc + rows_psd;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(nn * nn + 5 * nb + nb * (nb + 1)));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_rows);

  int row = 0;
  // Centering equalities (G 1 = 0)_i: remove the translation ambiguity.
  for (int i = 0; i < nn; ++i, ++row) {
    trips.emplace_back(row, svec_index(nn, i, i), 1.0);
    for (int j = 0; j < nn; ++j)
      if (j != i) trips.emplace_back(row, svec_index(nn, i, j), 1.0 / kSqrt2);
  }
  // Known squared distances.
  for (const auto& eq : p.distance_equalities) {
    add_sqdist_coeffs(trips, row, nn, eq.i, eq.j, 1.0);
    rhs(row++) = eq.value * eq.value;
  }
  // b >= 0.
  for (int i = 0; i < nb; ++i, ++row)
    trips.emplace_back(row, col_b + i, -1.0);
  // lower^2 <= D(G)_ij <= upper^2, one nonneg row per side.
  for (const auto& bd : p.distance_bounds) {
    add_sqdist_coeffs(trips, row, nn, bd.i, bd.j, -1.0);
    rhs(row++) = -bd.lower * bd.lower;
    add_sqdist_coeffs(trips, row, nn, bd.i, bd.j, 1.0);
    rhs(row++) = bd.upper * bd.upper;
  }
  // Lifted per-entry cones: 2 * L(G)_mk * (1/2) >= b_mk^2.
  for (int kk = 0; kk < k; ++kk)
    for (int mm = 0; mm < m; ++mm) {
      add_sqdist_coeffs(trips, row, nn, mm, m + kk, -1.0);
      rhs(row++) = 0.0;
      rhs(row++) = 0.5;
      trips.emplace_back(row, col_b + kk * m + mm, -1.0);
      rhs(row++) = 0.0;
    }
  // Epigraph cone: || vec(projection(B + scatter(alpha) - target)) || <= epi.
  trips.emplace_back(row, col_epi, -1.0);
  rhs(row++) = 0.0;
  const Eigen::MatrixXd jm = p.mode == SyncMode::sources_synced
                                 ? Eigen::MatrixXd::Identity(m, m)
                                 : centering_matrix(m);
  const Eigen::MatrixXd jk = p.mode == SyncMode::receivers_synced
                                 ? Eigen::MatrixXd::Identity(k, k)
                                 : centering_matrix(k);
  const Eigen::MatrixXd centered_target =
      timing_invariant_projection(p.target, p.mode);
  for (int kk = 0; kk < k; ++kk)
    for (int mm = 0; mm < m; ++mm, ++row) {
      for (int kp = 0; kp < k; ++kp)
        for (int mp = 0; mp < m; ++mp) {
          const double coeff = jm(mm, mp) * jk(kp, kk);
          if (coeff != 0.0)
            trips.emplace_back(row, col_b + kp * m + mp, -coeff);
        }
      for (int i = 0; i < n_miss; ++i) {
        const double coeff =
            jm(mm, p.missing[static_cast<std::size_t>(i)].first) *
            jk(p.missing[static_cast<std::size_t>(i)].second, kk);
        if (coeff != 0.0) trips.emplace_back(row, col_alpha + i, -coeff);
      }
      rhs(row) = -centered_target(mm, kk);
    }
  // The Gram matrix itself: slack of these rows is svec(G), kept in the
  // semidefinite cone.
  for (int i = 0; i < n_svec; ++i, ++row) trips.emplace_back(row, i, -1.0);

  ConicProgram prog;
  prog.a.resize(n_rows, n_vars);
  prog.a.setFromTriplets(trips.begin(), trips.end());
  prog.b = rhs;
  prog.c = Eigen::VectorXd::Zero(n_vars);
  prog.c(col_epi) = 1.0;
  prog.cones.push_back({ConeType::zero, rows_zero});
  prog.cones.push_back({ConeType::nonneg, rows_nonneg});
  for (int i = 0; i < nb; ++i) prog.cones.push_back({ConeType::rsoc, 3});
  prog.cones.push_back({ConeType::soc, rows_soc});
  prog.cones.push_back({ConeType::psd, nn});
  prog.validate();
  return prog;
}

SdrSolution solve(const SdrProblem& p, ConicBackend& backend) {
  const ConicProgram prog = build(p);
  const ConicSolution cs = backend.solve(prog);

  SdrSolution out;
  out.solver_status = cs.status == ConicStatus::unbounded ? ConicStatus::failed
                                                          : cs.status;
  out.iterations = cs.iterations;
  if (out.solver_status != ConicStatus::optimal &&
      out.solver_status != ConicStatus::near_optimal)
    return out;

  const int nn = p.n();
  const int n_svec = svec_size(nn);
  const int nb = p.m * p.k;
  out.g.g = unsvec(cs.x.head(n_svec), nn);
  out.g.m = p.m;
  out.g.k = p.k;
  out.b = Eigen::MatrixXd::Zero(p.m, p.k);
  for (int kk = 0; kk < p.k; ++kk)
    for (int mm = 0; mm < p.m; ++mm)
      out.b(mm, kk) = cs.x(n_svec + kk * p.m + mm);
  out.alpha = cs.x.segment(n_svec + nb, static_cast<int>(p.missing.size()));
  const double epi = cs.x(cs.x.size() - 1);
  out.objective = 0.5 * epi * epi;
  return out;
}

SdrSolution solve(const SdrProblem& p) {
  AdmmBackend backend;
  return solve(p, backend);
}

PointSet extract_points(const SdrSolution& solution, int d,
                        double* tail_mass) {
  if (solution.solver_status != ConicStatus::optimal &&
      solution.solver_status != ConicStatus::near_optimal)
    throw SolverError("no relaxation solution to extract points from");
  if (tail_mass != nullptr) *tail_mass = gram_tail_mass(solution.g, d);
  return points_from_gram(solution.g, d);
}

}  // namespace arraycalib
