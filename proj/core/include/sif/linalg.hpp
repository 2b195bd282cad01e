#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "sif/rng.hpp"

namespace sif {

// Matrix conventions used throughout the library:
//  - SPD covariances are plain Eigen matrices kept symmetric by the callers
//    (they are re-symmetrized as (P + P^T)/2 before factorization).
//  - Triangular factors S are square lower-triangular with nonnegative
//    diagonal and satisfy P = S * S^T.
using SpdMatrix = Eigen::MatrixXd;
using LowerTriangularFactor = Eigen::MatrixXd;

/// (P + P^T) / 2.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& p);

/// Strict Cholesky factorization of a symmetric positive definite matrix.
/// Returns lower-triangular S with nonnegative diagonal and S*S^T = P.
/// Throws NotPositiveDefinite when a pivot is not strictly positive and
/// DimensionMismatch when P is not square or grossly asymmetric.
LowerTriangularFactor factor_spd(const SpdMatrix& p);

/// Factorization that tolerates positive semidefinite input. Tries the strict
/// Cholesky first; on failure clips negative eigenvalues to zero, rebuilds a
/// lower-triangular factor, and increments the fallback counter. A matrix with
/// eigenvalues significantly below zero still throws NotPositiveDefinite.
LowerTriangularFactor factor_psd(const SpdMatrix& p);

/// Number of times factor_psd had to fall back to eigenvalue clipping.
std::uint64_t psd_fallback_count() noexcept;
void reset_psd_fallback_count() noexcept;

/// Gram-preserving triangularization of a rectangular n-by-m matrix, m >= n.
/// Returns square lower-triangular T with nonnegative diagonal and
/// T*T^T = M*M^T (Householder reflections via a QR of M^T).
LowerTriangularFactor triangularize(const Eigen::MatrixXd& m);

/// Rank-one downdate of a lower-triangular factor, in place:
/// on return L*L^T equals its previous value minus u*u^T.
/// Throws DowndateFailure when the result would not be positive definite.
void cholesky_downdate(Eigen::MatrixXd& factor, Eigen::VectorXd u);

/// Orthogonal matrix drawn from the rotation-invariant (Haar) distribution,
/// built from a QR factorization of an iid standard normal matrix with the
/// sign of the R diagonal folded into Q.
Eigen::MatrixXd random_orthogonal(int dim, RngStream& rng);

/// Draw from the chi distribution with dof degrees of freedom, via the square
/// root of a gamma(dof/2, 2) draw.
double sample_chi(int dof, RngStream& rng);

}  // namespace sif
