#pragma once

#include <Eigen/Dense>

#include "arraycalib/types.hpp"

namespace arraycalib {

// Geometric centering matrix J_L = I - (1/L) 11^T. J_1 = [[0]].
Eigen::MatrixXd centering_matrix(int l);

// Receiver-to-source Euclidean distances, Delta(m, k) = ||r_m - s_k||.
Eigen::MatrixXd cross_distances(const PointSet& x);

// G = X^T X. When center is set the point set is first translated so the
// full set (receivers and sources together) has zero mean, which makes
// G 1 = 0 hold exactly.
GramMatrix gram_from_points(const PointSet& x, bool center = true);

// Squared-distance matrix D(G) = diag(G) 1^T - 2 G + 1 diag(G)^T.
Eigen::MatrixXd edm_from_gram(const GramMatrix& g);

// Receiver-rows x source-columns block of D(G); equals the entrywise
// square of the cross-distance matrix for an exact Gram matrix.
Eigen::MatrixXd cross_block(const GramMatrix& g);

// Spectral factorization of a Gram matrix back into d-dimensional
// coordinates: eigenvalues sorted descending, negatives clamped to zero,
// X = diag(sqrt(lambda_1..d)) V_d^T. Each eigenvector's sign is fixed by
// making its largest-magnitude entry positive, so the output is
// deterministic. Throws InvalidInputError when d exceeds the set size.
PointSet points_from_gram(const GramMatrix& g, int d);

// Eigenvalues of the symmetrized Gram matrix, descending. Exposed for
// rank diagnostics (relaxations return matrices of higher rank than d).
Eigen::VectorXd gram_eigenvalues(const GramMatrix& g);

// Fraction of spectral mass beyond the top d eigenvalues,
// sum_{i>d} |lambda_i| / sum_i |lambda_i| (0 when the matrix is zero).
double gram_tail_mass(const GramMatrix& g, int d);

}  // namespace arraycalib
