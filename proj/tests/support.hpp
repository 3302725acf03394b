#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "spectrack/linalg.hpp"
#include "spectrack/operator.hpp"
#include "spectrack/rng.hpp"
#include "spectrack/solvers.hpp"

namespace spectrack::test {

inline DenseMatrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
    Rng rng(seed);
    DenseMatrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

inline DenseMatrix random_symmetric(Index n, std::uint64_t seed) {
    DenseMatrix m = random_matrix(n, n, seed);
    return 0.5 * (m + m.transpose());
}

/// Symmetric matrix with a prescribed descending spectrum in a random frame.
inline DenseMatrix planted_symmetric(const Vector& spectrum, std::uint64_t seed) {
    const Index n = spectrum.size();
    const OrthonormalBasis q = random_orthonormal_init(n, n, seed);
    return q.matrix * spectrum.asDiagonal() * q.matrix.transpose();
}

struct DenseEigOracle {
    Vector values; // descending
    DenseMatrix vectors;

    explicit DenseEigOracle(const DenseMatrix& sym) {
        Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(0.5 * (sym + sym.transpose()));
        values = eig.eigenvalues().reverse();
        vectors = eig.eigenvectors().rowwise().reverse();
    }

    OrthonormalBasis top(Index r) const { return OrthonormalBasis(vectors.leftCols(r)); }
};

struct DenseSvdOracle {
    DenseMatrix u, v;
    Vector s;

    explicit DenseSvdOracle(const DenseMatrix& a) {
        Eigen::BDCSVD<DenseMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        u = svd.matrixU();
        v = svd.matrixV();
        s = svd.singularValues();
    }
};

/// Probes Op(alpha x + beta y) = alpha Op(x) + beta Op(y) on random inputs.
inline double linearity_defect(const LinearOperator& op, std::uint64_t seed, int probes = 10) {
    Rng rng(seed);
    double worst = 0.0;
    for (int p = 0; p < probes; ++p) {
        Vector x(op.in_dim()), y(op.in_dim());
        for (Index i = 0; i < op.in_dim(); ++i) x(i) = rng.normal(), y(i) = rng.normal();
        const double a = rng.normal(), b = rng.normal();
        const Vector lhs = op.apply(a * x + b * y);
        const Vector rhs = a * op.apply(x) + b * op.apply(y);
        const double scale = std::max(1.0, rhs.norm());
        worst = std::max(worst, (lhs - rhs).norm() / scale);
    }
    return worst;
}

/// Probes <x, Op y> = <Op x, y> on random inputs.
inline double symmetry_defect(const LinearOperator& op, std::uint64_t seed, int probes = 10) {
    Rng rng(seed);
    double worst = 0.0;
    for (int p = 0; p < probes; ++p) {
        Vector x(op.in_dim()), y(op.in_dim());
        for (Index i = 0; i < op.in_dim(); ++i) x(i) = rng.normal(), y(i) = rng.normal();
        const double lhs = x.dot(op.apply(y));
        const double rhs = op.apply(x).dot(y);
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    return worst;
}

} // namespace spectrack::test
