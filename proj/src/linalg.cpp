#include "spectrack/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>

#include "spectrack/rng.hpp"

namespace spectrack {

namespace {
constexpr double kDropTolRel = 1e-12;
}

double OrthonormalBasis::ortho_error() const {
    if (matrix.cols() == 0) return 0.0;
    DenseMatrix g = matrix.transpose() * matrix;
    g.diagonal().array() -= 1.0;
    return g.cwiseAbs().maxCoeff();
}

QrResult qr_thin(const DenseMatrix& a) {
    const Index n = a.rows();
    const Index k = a.cols();
    if (n < k) throw DimensionMismatch("qr_thin expects n >= k");

    Eigen::HouseholderQR<DenseMatrix> qr(a);
    DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(n, k);
    DenseMatrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

    for (Index i = 0; i < k; ++i) {
        const double drop = kDropTolRel * a.col(i).norm();
        if (std::abs(r(i, i)) <= drop)
            throw RankDeficient("qr_thin: column " + std::to_string(i) + " is numerically dependent");
        if (r(i, i) < 0.0) {
            r.row(i) = -r.row(i);
            q.col(i) = -q.col(i);
        }
    }
    return {OrthonormalBasis(std::move(q)), std::move(r)};
}

SymmetricSpectrum sym_eig_small(const DenseMatrix& s, double symmetry_tol) {
    if (s.rows() != s.cols()) throw DimensionMismatch("sym_eig_small expects a square matrix");
    const Index k = s.rows();
    const double scale = std::max(1.0, k > 0 ? s.cwiseAbs().maxCoeff() : 0.0);
    const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
    if (asym > symmetry_tol * scale)
        throw NotSymmetric("sym_eig_small: asymmetry " + std::to_string(asym) + " above tolerance");

    DenseMatrix sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(sym);
    if (eig.info() != Eigen::Success) throw Error("sym_eig_small: eigensolver failed");

    // Eigen returns ascending order; flip to descending.
    SymmetricSpectrum out;
    out.eigenvalues = eig.eigenvalues().reverse();
    out.eigenvectors = OrthonormalBasis(eig.eigenvectors().rowwise().reverse());
    return out;
}

double subspace_distance(const OrthonormalBasis& v, const OrthonormalBasis& w) {
    if (v.rows() != w.rows() || v.cols() != w.cols())
        throw DimensionMismatch("subspace_distance expects matching shapes");
    if (v.cols() == 0) return 0.0;

    // sin(theta_max) = ||(I - VV^T) W||_2 = sqrt(1 - sigma_min(V^T W)^2); the
    // residual form stays accurate for nearly identical subspaces where the
    // sigma_min route bottoms out near sqrt(machine eps)
    const DenseMatrix cross = v.matrix.transpose() * w.matrix;
    const DenseMatrix residual = w.matrix - v.matrix * cross;
    const SymmetricSpectrum gram = sym_eig_small(residual.transpose() * residual);
    const double largest = std::clamp(gram.eigenvalues(0), 0.0, 1.0);
    return std::sqrt(largest);
}

NormEstimate spectral_norm_estimate(const LinearOperator& op, double tol, int max_iter,
                                    std::uint64_t seed) {
    const Index n = op.in_dim();
    Rng rng(Rng::derive_seed(seed, 0x6e6f726d));

    Vector x(n);
    for (Index i = 0; i < n; ++i) x(i) = rng.normal();
    double xnorm = x.norm();
    if (xnorm == 0.0) x(0) = 1.0, xnorm = 1.0;
    x /= xnorm;

    // Power iteration on the Gram map op^T op. Squaring the spectrum also
    // covers symmetric operators whose extreme eigenvalues tie in magnitude
    // with opposite signs (a plain Rayleigh quotient stalls there). The
    // estimate ||op x||, x unit, never exceeds the true norm.
    NormEstimate best;
    double prev = -1.0;
    int stagnant = 0;
    for (int it = 1; it <= max_iter; ++it) {
        best.iterations = it;
        const Vector image = op.apply(x);
        const double estimate = image.norm();
        const Vector next = op.apply_transpose(image);
        best.value = std::max(best.value, estimate);
        const double step_norm = next.norm();
        if (step_norm == 0.0) {
            // the operator annihilates the iterate; the estimate is exact
            best.converged = true;
            return best;
        }
        if (prev >= 0.0 && std::abs(estimate - prev) <= tol * std::max(estimate, 1e-300)) {
            if (++stagnant >= 3) {
                best.converged = true;
                return best;
            }
        } else {
            stagnant = 0;
        }
        prev = estimate;
        x = next / step_norm;
    }
    return best;
}

OrthonormalBasis orthogonalize_against(const OrthonormalBasis& v, const DenseMatrix& x) {
    const Index n = x.rows();
    const Index r = v.cols();
    const Index m = x.cols();
    if (r > 0 && v.rows() != n) throw DimensionMismatch("orthogonalize_against: row mismatch");
    if (r + m > n) throw DimensionMismatch("orthogonalize_against: r + m exceeds n");

    DenseMatrix out(n, m);
    for (Index j = 0; j < m; ++j) {
        Vector c = x.col(j);
        const double drop = kDropTolRel * std::max(c.norm(), 1e-300);
        for (int pass = 0; pass < 2; ++pass) {
            for (Index i = 0; i < r; ++i) c -= v.matrix.col(i).dot(c) * v.matrix.col(i);
            for (Index i = 0; i < j; ++i) c -= out.col(i).dot(c) * out.col(i);
        }
        const double norm = c.norm();
        if (norm <= drop)
            throw RankDeficient("orthogonalize_against: column " + std::to_string(j) + " collapsed");
        out.col(j) = c / norm;
    }
    return OrthonormalBasis(std::move(out));
}

double top_singular_value(const DenseMatrix& y) {
    if (y.size() == 0) return 0.0;
    // Gram matrix of the thinner side keeps the eigenproblem small.
    DenseMatrix g;
    if (y.cols() <= y.rows())
        g = y.transpose() * y;
    else
        g = y * y.transpose();
    const SymmetricSpectrum eig = sym_eig_small(g);
    return std::sqrt(std::max(0.0, eig.eigenvalues(0)));
}

} // namespace spectrack
