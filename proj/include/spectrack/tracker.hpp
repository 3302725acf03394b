#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>

#include "spectrack/operators.hpp"
#include "spectrack/solvers.hpp"

namespace spectrack {

struct SubspaceEstimate {
    OrthonormalBasis basis;   // n x r
    Vector ritz_values;       // descending
    double certified_eps = 1.0;
};

/// Per-update diagnostics. e_norm comes from power iteration and is a lower
/// estimate of the true perturbation norm (flagged for report consumers).
struct StepReport {
    double e_norm = 0.0;
    double ev_norm = 0.0;
    double d_t = 0.0;
    double rho_t = std::numeric_limits<double>::quiet_NaN();
    int kmax_bound = 0;
    int iterations_core = 0;
    int iterations_high = 0;
    Index r_before = 0;
    Index r_after = 0;
    bool skipped = false;
    bool applicable = false;
    bool fell_back_to_random = false;
    bool e_norm_is_lower_estimate = true;
    long matvecs_core = 0; // operator columns consumed by the core refresh
    long matvecs_high = 0;
    double wall_core_ms = 0.0;
    double wall_high_ms = 0.0;
};

struct TrackerConfig {
    Index r = 5;
    Index q = 5;                 // oversampled eigenvalue estimates past r
    double eps = 1e-3;           // target subspace accuracy
    Method method = Method::SubspaceIteration;
    int hysteresis_T = 5;
    int hard_kmax_cap = 500;     // guards the warm bound against rho -> 1+
    double kmax_constant = 10.0; // constant inside the Gaussian-init bound
    double gamma_floor = 1e-3;
    double norm_tol = 1e-4;
    int norm_max_iter = 300;
    bool exact_accumulated_norm = false; // re-estimate accumulated E instead of summing
    double value_shift = 0.0;    // subtracted from Ritz values for reporting / sizing
    Index r_min = 2;
    Index r_cap = 0;             // 0: only bounded by n - q
    bool adaptive_size = true;
    bool cold_start = false;     // reseed randomly every step (diagnostics mode)
    std::uint64_t seed = 0;
};

/// Value state of the tracking pipeline. Steps consume a state and return a
/// new one, so a failed step leaves the caller's state untouched.
struct TrackerState {
    TrackerConfig cfg;
    OpPtr op;
    SubspaceEstimate core;
    Vector high_order;           // estimates r+1 .. r+q, descending
    double high_residual = 0.0;  // residual slack carried by high_order(0)
    double rho_hat = 0.0;        // spectral radius upper estimate
    Index size_candidate = 0;    // hysteresis bookkeeping
    int size_streak = 0;
    long step_index = 0;
    OpPtr pending;               // accumulated perturbation across skipped steps
    double pending_e_norm = 0.0;

    Index r() const { return core.basis.cols(); }
    Index n() const { return core.basis.rows(); }
    /// Core + high-order values in reporting frame (value_shift removed).
    Vector tracked_values() const;
};

struct DkProxy {
    double d_t = 1.0;
    bool applicable = false;
};

/// A-priori bound on the subspace rotation caused by a perturbation with
/// norm estimates (e_norm, ev_norm), given eigenvalue estimates accurate to
/// eps and a spectral-radius estimate. Not applicable when the gap condition
/// fails; d_t is then 1 so callers fall through to the random-init path.
DkProxy davis_kahan_proxy(double e_norm, double ev_norm, double lam_r, double lam_r1, double eps,
                          double rho_hat);

/// Lower estimate of the ratio driving solver convergence after the update.
/// Throws NonpositiveDenominator when the perturbed lower eigenvalue estimate
/// is not positive (callers should shift the operator).
double convergence_ratio(double lam_r, double lam_r1, double e_norm, double eps, double rho_hat);

/// Index of the smallest successive magnitude ratio |v_{i+1} / v_i| over
/// 2 <= i <= len-1 (1-based), ties toward the smallest index. Indices with a
/// zero denominator are skipped; throws DegenerateSpectrum if none remain.
Index candidate_size(const Vector& values);

/// Solves the initial estimates from Gaussian starts: the core subspace to
/// tolerance eps and q oversampled eigenvalues on the deflated operator.
TrackerState init_tracker(OpPtr op, const TrackerConfig& cfg);

/// One update step: assess the perturbation, skip when the rotation bound is
/// below eps, otherwise refresh the core subspace (warm-started, iteration
/// count bounded a priori), refresh the high-order values on the deflated
/// operator, update the spectral-radius estimate, and run the size criterion
/// with hysteresis. `replacement`, when given, is used as the updated operator
/// instead of composing state.op + update.
std::pair<TrackerState, StepReport> tracker_step(const TrackerState& state, OpPtr update,
                                                 OpPtr replacement = nullptr);

} // namespace spectrack
