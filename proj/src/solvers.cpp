#include "spectrack/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "spectrack/rng.hpp"

namespace spectrack {

namespace {

constexpr double kDropTolRel = 1e-12;

void validate_square_symmetric(const LinearOperator& op) {
    if (op.out_dim() != op.in_dim()) throw DimensionMismatch("solver expects a square operator");
    if (!op.is_symmetric()) throw NotSymmetric("solver expects a symmetric operator");
}

/// Orthonormalize the columns of w against `fixed` (may be empty) and each
/// other, replacing collapsed columns with random directions. Columns that
/// cannot fit (fixed.cols() + result >= n) are dropped.
DenseMatrix orthonormalize_with_rescue(const DenseMatrix& w, const DenseMatrix& fixed, Rng& rng,
                                       bool& reinflated, double drop_tol = kDropTolRel) {
    const Index n = w.rows();
    const Index room = n - fixed.cols();
    const Index m = std::min<Index>(w.cols(), room);
    if (m <= 0) return DenseMatrix(n, 0);

    DenseMatrix out(n, m);
    for (Index j = 0; j < m; ++j) {
        Vector c = w.col(j);
        bool accepted = false;
        for (int attempt = 0; attempt < 64 && !accepted; ++attempt) {
            const double ref = std::max(c.norm(), 1e-300);
            for (int pass = 0; pass < 2; ++pass) {
                if (fixed.cols() > 0)
                    for (Index i = 0; i < fixed.cols(); ++i) c -= fixed.col(i).dot(c) * fixed.col(i);
                for (Index i = 0; i < j; ++i) c -= out.col(i).dot(c) * out.col(i);
            }
            const double norm = c.norm();
            if (norm > drop_tol * ref) {
                out.col(j) = c / norm;
                accepted = true;
            } else {
                for (Index i = 0; i < n; ++i) c(i) = rng.normal();
                reinflated = true;
            }
        }
        if (!accepted) throw BlockBreakdown("unable to re-inflate a collapsed block");
    }
    return out;
}

Vector residuals_from(const DenseMatrix& images, const DenseMatrix& vectors, const Vector& theta,
                      Index target_r) {
    Vector res(target_r);
    for (Index i = 0; i < target_r; ++i)
        res(i) = (images.col(i) - theta(i) * vectors.col(i)).norm();
    return res;
}

bool within_tolerance(const Vector& res, const Vector& theta, double tol) {
    const double scale = std::max(1.0, std::abs(theta(0)));
    for (Index i = 0; i < res.size(); ++i)
        if (!(res(i) <= tol * scale)) return false;
    return true;
}

} // namespace

OrthonormalBasis random_orthonormal_init(Index n, Index k, std::uint64_t seed) {
    if (k > n || k < 1) throw DimensionMismatch("random_orthonormal_init expects 1 <= k <= n");
    Rng rng(Rng::derive_seed(seed, 0x696e6974));
    for (int attempt = 0; attempt < 16; ++attempt) {
        DenseMatrix g(n, k);
        for (Index j = 0; j < k; ++j)
            for (Index i = 0; i < n; ++i) g(i, j) = rng.normal();
        try {
            return qr_thin(g).q;
        } catch (const RankDeficient&) {
            // astronomically unlikely; redraw
        }
    }
    throw RankDeficient("random_orthonormal_init: repeated rank deficiency");
}

SolveResult subspace_iteration(const LinearOperator& op, const OrthonormalBasis& v0,
                               const SolverConfig& cfg) {
    validate_square_symmetric(op);
    const Index n = op.in_dim();
    const Index ell = v0.cols();
    if (v0.rows() != n) throw DimensionMismatch("initial basis has wrong height");
    if (cfg.target_r < 1 || cfg.target_r > ell) throw InvalidConfig("target_r out of range");
    if (cfg.k_max < 1) throw InvalidConfig("k_max must be positive");

    Rng rng(Rng::derive_seed(cfg.seed, 0x73756269));
    const DenseMatrix no_fixed(n, 0);

    SolveResult out;
    DenseMatrix v = v0.matrix;
    DenseMatrix u = op.apply_block(v);
    Vector theta;
    for (int k = 1; k <= cfg.k_max; ++k) {
        out.iterations_used = k;
        v = orthonormalize_with_rescue(u, no_fixed, rng, out.reinflated, cfg.reorth_tol);
        u = op.apply_block(v);
        DenseMatrix small = v.transpose() * u;
        const SymmetricSpectrum eig = sym_eig_small(0.5 * (small + small.transpose()));
        v = v * eig.eigenvectors.matrix;
        u = u * eig.eigenvectors.matrix;
        theta = eig.eigenvalues;

        out.residual_norms = residuals_from(u, v, theta, cfg.target_r);
        out.converged = within_tolerance(out.residual_norms, theta, cfg.tol);
        if (out.converged && cfg.early_stop()) break;
    }
    out.basis = OrthonormalBasis(v.leftCols(cfg.target_r));
    out.ritz_values = theta.head(cfg.target_r);
    return out;
}

SolveResult block_krylov(const LinearOperator& op, const OrthonormalBasis& v0,
                         const SolverConfig& cfg) {
    validate_square_symmetric(op);
    const Index n = op.in_dim();
    const Index b = v0.cols();
    if (v0.rows() != n) throw DimensionMismatch("initial block has wrong height");
    if (cfg.target_r < 1 || cfg.target_r > b) throw InvalidConfig("target_r out of range");
    if (cfg.k_max < 1) throw InvalidConfig("k_max must be positive");

    Rng rng(Rng::derive_seed(cfg.seed, 0x6b72796c));

    SolveResult out;
    DenseMatrix basis(n, 0);   // accumulated blocks
    DenseMatrix images(n, 0);  // op * basis, column for column
    DenseMatrix candidate = op.apply_block(v0.matrix);

    DenseMatrix ritz_vectors, ritz_images;
    Vector theta;
    bool have_pairs = false;

    auto extract_pairs = [&]() {
        DenseMatrix small = basis.transpose() * images;
        const SymmetricSpectrum eig = sym_eig_small(0.5 * (small + small.transpose()));
        const DenseMatrix coeff = eig.eigenvectors.matrix.leftCols(cfg.target_r);
        theta = eig.eigenvalues.head(cfg.target_r);
        ritz_vectors = basis * coeff;
        ritz_images = images * coeff;
        out.residual_norms = residuals_from(ritz_images, ritz_vectors, theta, cfg.target_r);
        out.converged = within_tolerance(out.residual_norms, theta, cfg.tol);
        have_pairs = true;
    };

    for (int k = 1; k <= cfg.k_max; ++k) {
        DenseMatrix block =
            orthonormalize_with_rescue(candidate, basis, rng, out.reinflated, cfg.reorth_tol);
        if (block.cols() == 0) break; // basis spans the whole space already
        const Index old = basis.cols();
        basis.conservativeResize(n, old + block.cols());
        basis.rightCols(block.cols()) = block;
        DenseMatrix block_image = op.apply_block(block);
        images.conservativeResize(n, old + block.cols());
        images.rightCols(block.cols()) = block_image;
        candidate = std::move(block_image);
        out.iterations_used = k;

        if (cfg.early_stop() || k == cfg.k_max) {
            extract_pairs();
            if (out.converged && cfg.early_stop()) break;
        }
    }
    if (!have_pairs) extract_pairs(); // basis saturated before the final pass
    out.basis = OrthonormalBasis(std::move(ritz_vectors));
    out.ritz_values = theta;
    return out;
}

SolveResult solve(const LinearOperator& op, const OrthonormalBasis& v0, const SolverConfig& cfg) {
    return cfg.method == Method::SubspaceIteration ? subspace_iteration(op, v0, cfg)
                                                   : block_krylov(op, v0, cfg);
}

RitzPairs rayleigh_ritz(const LinearOperator& op, const OrthonormalBasis& basis) {
    const DenseMatrix u = op.apply_block(basis.matrix);
    DenseMatrix small = basis.matrix.transpose() * u;
    const SymmetricSpectrum eig = sym_eig_small(0.5 * (small + small.transpose()));
    return {OrthonormalBasis(basis.matrix * eig.eigenvectors.matrix), eig.eigenvalues};
}

int kmax_warm(double d, double rho, double eps, Method method) {
    if (!(d >= 0.0) || d >= 1.0) throw InvalidConfig("kmax_warm expects d in [0, 1)");
    if (!(eps > 0.0)) throw InvalidConfig("kmax_warm expects eps > 0");
    if (d <= eps) return 0;
    if (!(rho > 1.0)) throw InvalidRate("kmax_warm expects rho > 1");

    const double delta = d / std::sqrt(1.0 - d * d);
    double value = 0.0;
    if (method == Method::SubspaceIteration) {
        value = std::log(delta / eps) / std::log(rho);
    } else {
        value = (1.0 + std::log2(delta / eps)) / std::sqrt(rho - 1.0);
    }
    return value <= 0.0 ? 0 : static_cast<int>(std::ceil(value));
}

int kmax_gaussian(double gamma, double eps, double constant, Method method) {
    if (!(gamma > 0.0)) throw InvalidRate("kmax_gaussian expects gamma > 0");
    if (!(eps > 0.0)) throw InvalidConfig("kmax_gaussian expects eps > 0");
    if (eps >= constant) return 0;

    const double numerator = std::log(constant / eps);
    double value = 0.0;
    if (method == Method::SubspaceIteration) {
        value = numerator / std::log1p(gamma);
    } else {
        value = numerator / std::sqrt(gamma);
    }
    return value <= 0.0 ? 0 : static_cast<int>(std::ceil(value));
}

} // namespace spectrack
