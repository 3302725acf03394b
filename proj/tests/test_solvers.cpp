#include <doctest.h>

#include <cmath>

#include "spectrack/operators.hpp"
#include "spectrack/solvers.hpp"
#include "support.hpp"

using namespace spectrack;
using test::DenseEigOracle;
using test::planted_symmetric;
using test::random_symmetric;

namespace {

OpPtr diag_op(std::initializer_list<double> values) {
    DenseMatrix d = DenseMatrix::Zero(values.size(), values.size());
    Index i = 0;
    for (double v : values) d(i, i) = v, ++i;
    return DenseOp::make(d, true);
}

/// First iteration count at which the solver's subspace is within eps of the
/// oracle subspace; runs are deterministic, so re-running with a larger k_max
/// replays the same trajectory.
int iterations_to_eps(const LinearOperator& op, const OrthonormalBasis& v0, Index r, Method method,
                      const OrthonormalBasis& truth, double eps, int k_limit) {
    for (int k = 1; k <= k_limit; ++k) {
        SolverConfig cfg;
        cfg.method = method;
        cfg.target_r = r;
        cfg.block = v0.cols();
        cfg.k_max = k;
        cfg.tol = 1e-300; // run exactly k iterations
        const SolveResult res = solve(op, v0, cfg);
        if (subspace_distance(res.basis, truth) <= eps) return k;
    }
    return k_limit + 1;
}

} // namespace

TEST_CASE("random_orthonormal_init is orthonormal and deterministic") {
    const OrthonormalBasis full = random_orthonormal_init(8, 8, 5);
    CHECK(full.ortho_error() <= 1e-12);

    const OrthonormalBasis a = random_orthonormal_init(40, 3, 9);
    const OrthonormalBasis b = random_orthonormal_init(40, 3, 9);
    CHECK((a.matrix - b.matrix).cwiseAbs().maxCoeff() == 0.0); // bitwise identical

    // different seeds give nearly orthogonal subspaces in high dimension
    int far = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        const OrthonormalBasis x = random_orthonormal_init(1000, 5, 1000 + trial);
        const OrthonormalBasis y = random_orthonormal_init(1000, 5, 5000 + trial);
        if (subspace_distance(x, y) > 0.9) ++far;
    }
    CHECK(far == 100);
}

TEST_CASE("subspace iteration fixed point converges immediately") {
    const auto op = diag_op({4, 3, 2, 1});
    DenseMatrix top(4, 2);
    top.setZero();
    top(0, 0) = 1;
    top(1, 1) = 1;
    SolverConfig cfg;
    cfg.target_r = 2;
    cfg.k_max = 50;
    cfg.tol = 1e-10;
    const SolveResult res = subspace_iteration(*op, OrthonormalBasis(top), cfg);
    CHECK(res.converged);
    CHECK(res.iterations_used == 1);
    CHECK(res.ritz_values(0) == doctest::Approx(4.0));
    CHECK(res.ritz_values(1) == doctest::Approx(3.0));
}

TEST_CASE("subspace iteration reaches the bound-predicted accuracy") {
    const auto op = diag_op({4, 3, 2, 1});
    DenseMatrix truth(4, 2);
    truth.setZero();
    truth(0, 0) = 1;
    truth(1, 1) = 1;
    const OrthonormalBasis oracle_basis{truth};
    const OrthonormalBasis v0 = random_orthonormal_init(4, 2, 3);
    const double d0 = subspace_distance(v0, oracle_basis);
    const double eps = 1e-3;
    const int k = kmax_warm(d0, 3.0 / 2.0, eps, Method::SubspaceIteration);

    SolverConfig cfg;
    cfg.target_r = 2;
    cfg.k_max = k;
    cfg.tol = 1e-300;
    const SolveResult res = subspace_iteration(*op, v0, cfg);
    CHECK(res.iterations_used == k);
    CHECK(subspace_distance(res.basis, oracle_basis) <= eps);
}

TEST_CASE("tied eigenvalues do not converge early and do not error") {
    const auto op = diag_op({3, 2, 2, 1});
    const OrthonormalBasis v0 = random_orthonormal_init(4, 2, 7);
    SolverConfig cfg;
    cfg.target_r = 2;
    cfg.k_max = 5;
    cfg.tol = 1e-14;
    const SolveResult res = subspace_iteration(*op, v0, cfg);
    CHECK_FALSE(res.converged);
    CHECK(res.iterations_used == 5);
}

TEST_CASE("block krylov fixed point") {
    const auto op = diag_op({4, 3, 2, 1});
    DenseMatrix top(4, 2);
    top.setZero();
    top(0, 0) = 1;
    top(1, 1) = 1;
    SolverConfig cfg;
    cfg.method = Method::BlockKrylov;
    cfg.target_r = 2;
    cfg.block = 2;
    cfg.k_max = 50;
    cfg.tol = 1e-10;
    const SolveResult res = block_krylov(*op, OrthonormalBasis(top), cfg);
    CHECK(res.converged);
    CHECK(res.iterations_used == 1);
}

TEST_CASE("block krylov equals Rayleigh-Ritz on the explicit Krylov matrix") {
    // spectrum kept in [0.2, 1] so the explicit Krylov matrix stays
    // well-enough conditioned for the comparison
    const Index n = 80;
    Vector spectrum(n);
    for (Index i = 0; i < n; ++i)
        spectrum(i) = 1.0 - 0.8 * static_cast<double>(i) / static_cast<double>(n - 1);
    const DenseMatrix a = planted_symmetric(spectrum, 23);
    const auto op = DenseOp::make(a, true);
    const OrthonormalBasis v0 = random_orthonormal_init(n, 3, 29);
    const int k = 8;

    SolverConfig cfg;
    cfg.method = Method::BlockKrylov;
    cfg.target_r = 3;
    cfg.block = 3;
    cfg.k_max = k;
    cfg.tol = 1e-300;
    const SolveResult res = block_krylov(*op, v0, cfg);
    CHECK(res.iterations_used == k);

    // oracle: explicit Krylov matrix [A V0, A^2 V0, ..., A^k V0]
    DenseMatrix krylov(n, 3 * k);
    DenseMatrix power = v0.matrix;
    for (int j = 0; j < k; ++j) {
        power = a * power;
        krylov.middleCols(3 * j, 3) = power;
    }
    const auto qr = qr_thin(krylov);
    const DenseMatrix small = qr.q.matrix.transpose() * a * qr.q.matrix;
    const SymmetricSpectrum eig = sym_eig_small(0.5 * (small + small.transpose()));
    for (Index i = 0; i < 3; ++i)
        CHECK(res.ritz_values(i) == doctest::Approx(eig.eigenvalues(i)).epsilon(1e-8));
}

TEST_CASE("both solvers coincide after a single iteration") {
    const DenseMatrix a = random_symmetric(30, 31);
    const auto op = DenseOp::make(a, true);
    const OrthonormalBasis v0 = random_orthonormal_init(30, 3, 37);
    SolverConfig cfg;
    cfg.target_r = 3;
    cfg.block = 3;
    cfg.k_max = 1;
    cfg.tol = 1e-300;
    const SolveResult si = subspace_iteration(*op, v0, cfg);
    cfg.method = Method::BlockKrylov;
    const SolveResult bk = block_krylov(*op, v0, cfg);
    CHECK((si.ritz_values - bk.ritz_values).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(subspace_distance(si.basis, bk.basis) <= 1e-8);
}

TEST_CASE("block krylov needs no more iterations than subspace iteration on a slim gap") {
    const Index n = 60;
    Vector spectrum(n);
    spectrum(0) = 2.2;
    spectrum(1) = 2.1;
    for (Index i = 2; i < n; ++i) spectrum(i) = 2.0 * std::pow(0.97, static_cast<double>(i - 1));
    // lambda_2 / lambda_3 = 1.05 + small
    const DenseMatrix a = planted_symmetric(spectrum, 41);
    const auto op = DenseOp::make(a, true);
    const DenseEigOracle oracle(a);
    const OrthonormalBasis v0 = random_orthonormal_init(n, 2, 43);
    const double eps = 1e-6;

    const int si = iterations_to_eps(*op, v0, 2, Method::SubspaceIteration, oracle.top(2), eps, 800);
    const int bk = iterations_to_eps(*op, v0, 2, Method::BlockKrylov, oracle.top(2), eps, 800);
    CHECK(bk <= si);
    CHECK(bk < 800);
}

TEST_CASE("warm-start dominance: measured iterations stay within the bound") {
    for (std::uint64_t trial = 0; trial < 5; ++trial) {
        const Index n = 50;
        Vector spectrum(n);
        const double ratio = 1.2 + 0.1 * static_cast<double>(trial);
        spectrum(0) = 3.0;
        spectrum(1) = 2.5;
        spectrum(2) = 2.0;
        for (Index i = 3; i < n; ++i)
            spectrum(i) = (2.0 / ratio) * std::pow(0.9, static_cast<double>(i - 3));
        const DenseMatrix a = planted_symmetric(spectrum, 100 + trial);
        const auto op = DenseOp::make(a, true);
        const DenseEigOracle oracle(a);
        const double rho = spectrum(2) / spectrum(3);
        const double eps = 1e-5;

        // a warm start at a known distance: mix the truth with noise
        const OrthonormalBasis noise = random_orthonormal_init(n, 3, 300 + trial);
        DenseMatrix mixed = oracle.top(3).matrix + 0.15 * noise.matrix;
        const OrthonormalBasis v0 = qr_thin(mixed).q;
        const double d0 = subspace_distance(v0, oracle.top(3));
        REQUIRE(d0 < 1.0);
        REQUIRE(d0 > eps);

        for (Method method : {Method::SubspaceIteration, Method::BlockKrylov}) {
            const int bound = kmax_warm(d0, rho, eps, method);
            const int measured =
                iterations_to_eps(*op, v0, 3, method, oracle.top(3), eps, bound + 5);
            CHECK(measured <= bound);
        }
    }
}

TEST_CASE("solver-oracle agreement on random symmetric matrices") {
    const DenseMatrix a = random_symmetric(150, 51);
    const auto op = DenseOp::make(a, true);
    const DenseEigOracle oracle(a);
    SolverConfig cfg;
    cfg.method = Method::BlockKrylov;
    cfg.target_r = 3;
    cfg.block = 3;
    cfg.k_max = 200;
    cfg.tol = 1e-9;
    const SolveResult res = block_krylov(*op, random_orthonormal_init(150, 3, 53), cfg);
    REQUIRE(res.converged);
    for (Index i = 0; i < 3; ++i)
        CHECK(res.ritz_values(i) == doctest::Approx(oracle.values(i)).epsilon(1e-8));
    CHECK(subspace_distance(res.basis, oracle.top(3)) <= cfg.tol);
}

TEST_CASE("minimum Ritz value of the target block is nondecreasing") {
    Vector spectrum(30);
    for (Index i = 0; i < 30; ++i) spectrum(i) = 5.0 * std::pow(0.85, static_cast<double>(i));
    const DenseMatrix a = planted_symmetric(spectrum, 61);
    const auto op = DenseOp::make(a, true);
    const OrthonormalBasis v0 = random_orthonormal_init(30, 4, 67);

    double previous = -std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 15; ++k) {
        SolverConfig cfg;
        cfg.target_r = 4;
        cfg.k_max = k;
        cfg.tol = 1e-300;
        const SolveResult res = subspace_iteration(*op, v0, cfg);
        const double lowest = res.ritz_values(3);
        CHECK(lowest >= previous - 1e-12);
        previous = lowest;
    }
}

TEST_CASE("rayleigh_ritz recovers exact invariant subspaces") {
    const auto op = diag_op({5, 1});
    DenseMatrix e1(2, 1);
    e1 << 1, 0;
    const RitzPairs pairs = rayleigh_ritz(*op, OrthonormalBasis(e1));
    CHECK(pairs.values(0) == doctest::Approx(5.0));

    const DenseMatrix a = random_symmetric(40, 71);
    const DenseEigOracle oracle(a);
    const RitzPairs exact = rayleigh_ritz(*DenseOp::make(a, true), oracle.top(4));
    for (Index i = 0; i < 4; ++i)
        CHECK(exact.values(i) == doctest::Approx(oracle.values(i)).epsilon(1e-12));
}

TEST_CASE("rayleigh_ritz values obey the quadratic perturbation bound") {
    Vector spectrum(50);
    for (Index i = 0; i < 50; ++i) spectrum(i) = 4.0 - 0.5 * static_cast<double>(i);
    const DenseMatrix a = planted_symmetric(spectrum, 73);
    const DenseEigOracle oracle(a);
    const double rho = spectrum.cwiseAbs().maxCoeff();

    // perturb the true top-3 basis to a known subspace distance
    const double target = 1e-2;
    const OrthonormalBasis noise = random_orthonormal_init(50, 3, 79);
    DenseMatrix mixed = oracle.top(3).matrix + 0.02 * noise.matrix;
    OrthonormalBasis basis = qr_thin(mixed).q;
    const double eps = subspace_distance(basis, oracle.top(3));
    REQUIRE(eps < 2 * target);

    const RitzPairs pairs = rayleigh_ritz(*DenseOp::make(a, true), basis);
    for (Index i = 0; i < 3; ++i)
        CHECK(std::abs(pairs.values(i) - oracle.values(i)) <= rho * eps * eps * (1 + 1e-8));
}

TEST_CASE("kmax_warm matches high-precision evaluation") {
    {
        const long double d = 0.1L, rho = 1.5L, eps = 1e-3L;
        const long double delta = d / std::sqrt(1.0L - d * d);
        const int expected = static_cast<int>(std::ceil(std::log(delta / eps) / std::log(rho)));
        CHECK(expected == 12);
        CHECK(kmax_warm(0.1, 1.5, 1e-3, Method::SubspaceIteration) == expected);
    }
    {
        const long double d = 0.1L, rho = 1.5L, eps = 1e-3L;
        const long double delta = d / std::sqrt(1.0L - d * d);
        const int expected =
            static_cast<int>(std::ceil((1.0L + std::log2(delta / eps)) / std::sqrt(rho - 1.0L)));
        CHECK(expected == 11);
        CHECK(kmax_warm(0.1, 1.5, 1e-3, Method::BlockKrylov) == expected);
    }
    CHECK(kmax_warm(1e-4, 1.5, 1e-3, Method::SubspaceIteration) == 0); // d <= eps
    CHECK_THROWS_AS(kmax_warm(0.1, 1.0, 1e-3, Method::SubspaceIteration), InvalidRate);
    CHECK_THROWS_AS(kmax_warm(1.0, 1.5, 1e-3, Method::SubspaceIteration), InvalidConfig);
}

TEST_CASE("kmax_gaussian matches high-precision evaluation") {
    {
        const long double expected = std::ceil(std::log(10.0L / 1e-3L) / std::log(1.1L));
        CHECK(static_cast<int>(expected) == 97);
        CHECK(kmax_gaussian(0.1, 1e-3, 10.0, Method::SubspaceIteration) == 97);
    }
    {
        const long double expected = std::ceil(std::log(10.0L / 1e-3L) / std::sqrt(0.1L));
        CHECK(static_cast<int>(expected) == 30);
        CHECK(kmax_gaussian(0.1, 1e-3, 10.0, Method::BlockKrylov) == 30);
    }
    CHECK(kmax_gaussian(0.1, 20.0, 10.0, Method::SubspaceIteration) == 0); // eps >= constant
    CHECK_THROWS_AS(kmax_gaussian(0.0, 1e-3, 10.0, Method::BlockKrylov), InvalidRate);
}

TEST_CASE("rank collapse is repaired and flagged") {
    // rank-one operator collapses every block after the first application
    Vector z(20);
    z.setOnes();
    const RankOnePerturbationOp op(1.0, z);
    SolverConfig cfg;
    cfg.target_r = 2;
    cfg.k_max = 4;
    cfg.tol = 1e-300;
    const SolveResult res = subspace_iteration(op, random_orthonormal_init(20, 2, 83), cfg);
    CHECK(res.reinflated);
    CHECK(res.ritz_values(0) == doctest::Approx(20.0)); // ||z||^2
}
