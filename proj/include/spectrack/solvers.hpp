#pragma once

#include <cstdint>

#include "spectrack/linalg.hpp"
#include "spectrack/operator.hpp"

namespace spectrack {

enum class Method { SubspaceIteration, BlockKrylov };

struct SolverConfig {
    Method method = Method::SubspaceIteration;
    Index target_r = 1;
    Index block = 0;    // iterate dimension (ell / b); 0 means target_r
    int k_max = 100;
    double tol = 1e-8;        // residual threshold, relative to max(1, |theta_1|)
    double reorth_tol = 1e-12; // relative drop tolerance during reorthogonalization
    std::uint64_t seed = 0;

    Index block_size() const { return block > 0 ? block : target_r; }
    /// Residual checks are skipped while iterating when tol is this small;
    /// useful for running a prescribed number of iterations exactly.
    bool early_stop() const { return tol > 1e-200; }
};

struct SolveResult {
    OrthonormalBasis basis;   // n x target_r Ritz vectors
    Vector ritz_values;       // descending, length target_r
    int iterations_used = 0;
    Vector residual_norms;    // length target_r
    bool converged = false;
    bool reinflated = false;  // rank collapse was repaired with random directions
};

/// QR of an n x k standard normal draw; deterministic for a fixed seed.
OrthonormalBasis random_orthonormal_init(Index n, Index k, std::uint64_t seed);

/// Simultaneous iteration with Rayleigh-Ritz extraction. Each iteration costs
/// one block matvec, one thin QR and one small eigendecomposition. Stops early
/// once every target residual ||A v_i - theta_i v_i|| falls below
/// tol * max(1, |theta_1|); otherwise runs k_max iterations.
SolveResult subspace_iteration(const LinearOperator& op, const OrthonormalBasis& v0,
                               const SolverConfig& cfg);

/// Block Lanczos with full reorthogonalization against all previous blocks.
/// After k iterations the basis spans {A V0, A^2 V0, ..., A^k V0}, and the
/// returned pairs are the Rayleigh-Ritz extraction over that space, so one
/// iteration coincides with one step of subspace iteration. Block rank loss is
/// repaired by re-inflating with random orthogonal directions (flagged).
SolveResult block_krylov(const LinearOperator& op, const OrthonormalBasis& v0,
                         const SolverConfig& cfg);

/// Dispatch on cfg.method.
SolveResult solve(const LinearOperator& op, const OrthonormalBasis& v0, const SolverConfig& cfg);

struct RitzPairs {
    OrthonormalBasis rotated;
    Vector values; // descending
};

/// Rayleigh-Ritz extraction over a fixed orthonormal basis.
RitzPairs rayleigh_ritz(const LinearOperator& op, const OrthonormalBasis& basis);

/// Iteration count sufficient to refine a warm start at subspace distance d to
/// accuracy eps when the convergence ratio is rho > 1. Returns 0 when d <= eps.
int kmax_warm(double d, double rho, double eps, Method method);

/// Iteration count for a Gaussian random start with spectral-decay rate gamma;
/// `constant` absorbs the (configuration-dependent) initialization constant.
int kmax_gaussian(double gamma, double eps, double constant, Method method);

} // namespace spectrack
