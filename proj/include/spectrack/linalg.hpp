#pragma once

#include <cstdint>

#include "spectrack/operator.hpp"
#include "spectrack/types.hpp"

namespace spectrack {

/// n x k matrix with orthonormal columns.
struct OrthonormalBasis {
    DenseMatrix matrix;
    double ortho_tol = 1e-12;

    OrthonormalBasis() = default;
    explicit OrthonormalBasis(DenseMatrix m, double tol = 1e-12)
        : matrix(std::move(m)), ortho_tol(tol) {}

    Index rows() const { return matrix.rows(); }
    Index cols() const { return matrix.cols(); }

    /// max-norm deviation of Q^T Q from the identity.
    double ortho_error() const;
};

struct SymmetricSpectrum {
    Vector eigenvalues; // descending
    OrthonormalBasis eigenvectors;
};

struct QrResult {
    OrthonormalBasis q;
    DenseMatrix r; // upper triangular with nonnegative diagonal
};

/// Thin QR of an n x k matrix (n >= k). The diagonal of R is forced
/// nonnegative so repeated factorizations of the same data are reproducible.
/// Throws RankDeficient when a diagonal entry falls below
/// 1e-12 * (norm of the corresponding input column).
QrResult qr_thin(const DenseMatrix& a);

/// Eigendecomposition of a small symmetric matrix, eigenvalues descending.
/// Throws NotSymmetric when max|S - S^T| exceeds symmetry_tol * max(1, max|S|).
SymmetricSpectrum sym_eig_small(const DenseMatrix& s, double symmetry_tol = 1e-8);

/// Spectral-norm distance between two equal-dimension subspaces:
/// ||VV^T - WW^T||_2 = sin of the largest principal angle, in [0, 1].
/// Computed from sigma_min(V^T W) without forming n x n projectors.
double subspace_distance(const OrthonormalBasis& v, const OrthonormalBasis& w);

struct NormEstimate {
    double value = 0.0;   // one-sided: never exceeds the true norm
    bool converged = false;
    int iterations = 0;
};

/// Power-iteration estimate of ||op||_2. Symmetric operators are iterated
/// directly; rectangular ones go through the Gram operator. The Rayleigh
/// quotient is a lower bound on the true norm, so the estimate is one-sided.
/// Stops when the estimate stagnates to relative tol over 3 consecutive
/// iterations; returns the best value found with converged=false otherwise.
NormEstimate spectral_norm_estimate(const LinearOperator& op, double tol = 1e-4,
                                    int max_iter = 300, std::uint64_t seed = 0);

/// Orthonormalize the columns of x against range(v) and each other using two
/// passes of modified Gram-Schmidt. Throws RankDeficient when a column
/// collapses below the drop tolerance.
OrthonormalBasis orthogonalize_against(const OrthonormalBasis& v, const DenseMatrix& x);

/// Exact largest singular value of a dense matrix via the small Gram matrix.
double top_singular_value(const DenseMatrix& y);

} // namespace spectrack
