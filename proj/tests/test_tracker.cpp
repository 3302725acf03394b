#include <doctest.h>

#include <cmath>

#include "spectrack/graph.hpp"
#include "spectrack/tracker.hpp"
#include "support.hpp"

using namespace spectrack;
using test::DenseEigOracle;
using test::planted_symmetric;
using test::random_symmetric;

namespace {

Vector gapped_spectrum(Index n, double top, Index r, double gap_factor, double tail_decay) {
    Vector s(n);
    for (Index i = 0; i < n; ++i) {
        if (i < r)
            s(i) = top * std::pow(0.97, static_cast<double>(i));
        else
            s(i) = top * gap_factor * std::pow(tail_decay, static_cast<double>(i - r));
    }
    return s;
}

TrackerConfig basic_config(Index r = 2, Index q = 2, double eps = 1e-6) {
    TrackerConfig cfg;
    cfg.r = r;
    cfg.q = q;
    cfg.eps = eps;
    cfg.adaptive_size = false;
    cfg.seed = 11;
    return cfg;
}

} // namespace

TEST_CASE("davis_kahan_proxy analytic behavior") {
    // zero perturbation triggers nothing
    const DkProxy zero = davis_kahan_proxy(0.0, 0.0, 2.0, 1.0, 1e-3, 2.0);
    CHECK(zero.d_t == doctest::Approx(0.0));
    CHECK(zero.applicable);

    // failed gap condition
    const DkProxy failed = davis_kahan_proxy(0.5, 0.3, 1.0, 1.0, 0.0, 1.0);
    CHECK_FALSE(failed.applicable);
    CHECK(failed.d_t == doctest::Approx(1.0));

    // exact eigenvalues: d_t = 2 ev / gap
    const DkProxy exact = davis_kahan_proxy(0.05, 0.01, 2.0, 1.0, 0.0, 5.0);
    CHECK(exact.applicable);
    CHECK(exact.d_t == doctest::Approx(2.0 * 0.01 / 1.0));
}

TEST_CASE("davis_kahan_proxy majorizes the true subspace rotation") {
    // gapped instances with exact eigenvalue knowledge (eps = 0)
    int checked = 0;
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
        const Index n = 50;
        Vector spectrum(n);
        for (Index i = 0; i < n; ++i) spectrum(i) = 3.0 * std::pow(0.85, static_cast<double>(i));
        const DenseMatrix a = planted_symmetric(spectrum, 500 + trial);
        DenseMatrix e = 0.01 * random_symmetric(n, 900 + trial);

        const DenseEigOracle before(a);
        const DenseEigOracle after(a + e);
        const Index r = 3;
        const double true_dist = subspace_distance(before.top(r), after.top(r));

        const double e_norm = DenseEigOracle(e).values.cwiseAbs().maxCoeff();
        const double ev_norm = top_singular_value(e * before.top(r).matrix);
        const double rho = spectrum(0);
        const DkProxy dk =
            davis_kahan_proxy(e_norm, ev_norm, before.values(r - 1), before.values(r), 0.0, rho);
        if (!dk.applicable) continue;
        ++checked;
        CHECK(dk.d_t >= true_dist);
    }
    CHECK(checked >= 45); // the gap condition holds on almost all draws
}

TEST_CASE("convergence_ratio formula and error paths") {
    CHECK(convergence_ratio(2.0, 1.0, 0.0, 0.0, 0.0) == doctest::Approx(2.0));
    const double value = convergence_ratio(2.0, 1.0, 0.1, 1e-3, 2.0);
    const double expected = (2.0 - 0.1 - 2e-6) / (1.0 + 0.1 + 4e-6);
    CHECK(value == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(value - 1.72727) < 1e-4);
    CHECK_THROWS_AS(convergence_ratio(2.0, -1.0, 0.5, 0.0, 0.0), NonpositiveDenominator);
}

TEST_CASE("candidate_size picks the smallest successive ratio") {
    Vector v(5);
    v << 5, 4, 3.9, 1, 0.9;
    CHECK(candidate_size(v) == 3);

    Vector three(3);
    three << 3, 2, 1;
    CHECK(candidate_size(three) == 2);

    Vector tied(6);
    tied << 8, 4, 2, 4, 2, 1; // ratio 0.5 at i = 2 and i = 4 (and i = 5)
    CHECK(candidate_size(tied) == 2);

    Vector degenerate(4);
    degenerate << 1, 0, 0, 0;
    CHECK_THROWS_AS(candidate_size(degenerate), DegenerateSpectrum);

    Vector zero_inside(4);
    zero_inside << 4, 2, 0, 0; // i = 3 skipped (zero denominator), i = 2 stays
    CHECK(candidate_size(zero_inside) == 2);
}

TEST_CASE("init_tracker on a diagonal operator") {
    DenseMatrix d = DenseMatrix::Zero(5, 5);
    d.diagonal() << 5, 4, 3, 2, 1;
    const auto op = DenseOp::make(d, true);
    const TrackerState state = init_tracker(op, basic_config(2, 2, 1e-6));

    DenseMatrix truth(5, 2);
    truth.setZero();
    truth(0, 0) = 1;
    truth(1, 1) = 1;
    CHECK(subspace_distance(state.core.basis, OrthonormalBasis(truth)) <= 1e-6);
    CHECK(state.high_order(0) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(state.high_order(1) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(state.rho_hat >= 5.0 - 1e-9);

    TrackerConfig bad = basic_config(4, 2);
    CHECK_THROWS_AS(init_tracker(op, bad), DimensionMismatch); // r + q > n
}

TEST_CASE("init_tracker reaches oracle accuracy on an SBM operator") {
    const auto graph = sample_sbm({200, 5, 0.5, 0.1, 3}, 0.0);
    const auto op = graph.normalized();
    TrackerConfig cfg = basic_config(5, 3, 1e-6);
    cfg.seed = 17;
    const TrackerState state = init_tracker(op, cfg);
    const DenseEigOracle oracle(op->to_dense());
    CHECK(subspace_distance(state.core.basis, oracle.top(5)) <= 1e-6);
}

TEST_CASE("zero update is skipped and leaves the state intact") {
    DenseMatrix d = DenseMatrix::Zero(5, 5);
    d.diagonal() << 5, 4, 3, 2, 1;
    const auto op = DenseOp::make(d, true);
    const TrackerState state = init_tracker(op, basic_config());

    const auto [next, report] = tracker_step(state, ZeroOp::make(5, 5));
    CHECK(report.skipped);
    CHECK(report.e_norm == doctest::Approx(0.0));
    CHECK(report.d_t == doctest::Approx(0.0));
    CHECK(next.step_index == state.step_index + 1);
    CHECK((next.core.basis.matrix - state.core.basis.matrix).cwiseAbs().maxCoeff() == 0.0);
    CHECK((next.high_order - state.high_order).cwiseAbs().maxCoeff() == 0.0);
    CHECK(next.rho_hat == state.rho_hat);
    CHECK(next.op.get() == state.op.get());
}

TEST_CASE("diagonal bump is tracked within the iteration bound") {
    DenseMatrix d = DenseMatrix::Zero(5, 5);
    d.diagonal() << 5, 4, 3, 2, 1;
    const auto op = DenseOp::make(d, true);
    const TrackerState state = init_tracker(op, basic_config(2, 2, 1e-6));

    DenseMatrix bump = DenseMatrix::Zero(5, 5);
    bump(0, 0) = 0.1;
    const auto [next, report] = tracker_step(state, DenseOp::make(bump, true));
    CHECK_FALSE(report.skipped);
    CHECK(next.core.ritz_values(0) == doctest::Approx(5.1).epsilon(1e-6));
    CHECK(next.core.ritz_values(1) == doctest::Approx(4.0).epsilon(1e-6));
    if (!report.fell_back_to_random) CHECK(report.iterations_core <= report.kmax_bound);
}

TEST_CASE("errors leave the caller's state untouched (transactional step)") {
    DenseMatrix d = DenseMatrix::Zero(6, 6);
    d.diagonal() << 6, 5, 4, 3, 2, 1;
    const auto op = DenseOp::make(d, true);
    const TrackerState state = init_tracker(op, basic_config());
    const DenseMatrix basis_copy = state.core.basis.matrix;

    CHECK_THROWS_AS(tracker_step(state, ZeroOp::make(4, 4)), DimensionMismatch);
    CHECK_THROWS_AS(tracker_step(state, DenseOp::make(test::random_matrix(6, 6, 5), false)),
                    NotSymmetric);
    CHECK((state.core.basis.matrix - basis_copy).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tracked stream of random perturbations stays within eps of the oracle") {
    const Index n = 120;
    const Index r = 4;
    Vector spectrum = gapped_spectrum(n, 4.0, r, 0.5, 0.85);
    DenseMatrix a = planted_symmetric(spectrum, 7);
    TrackerConfig cfg = basic_config(r, 3, 1e-3);
    cfg.seed = 23;
    TrackerState state = init_tracker(DenseOp::make(a, true), cfg);

    int refreshed = 0;
    for (int step = 0; step < 12; ++step) {
        const DenseMatrix e = 0.01 * random_symmetric(n, 4000 + step);
        a += e;
        const auto [next, report] =
            tracker_step(state, DenseOp::make(e, true), DenseOp::make(a, true));
        state = next;
        if (!report.skipped) ++refreshed;
        if (!report.skipped && !report.fell_back_to_random)
            CHECK(report.iterations_core <= report.kmax_bound);

        const DenseEigOracle oracle(a);
        CHECK(subspace_distance(state.core.basis, oracle.top(r)) <= cfg.eps);
        // high-order values track the oracle tail within the error budget
        const double rho = oracle.values.cwiseAbs().maxCoeff();
        for (Index i = 0; i < cfg.q; ++i) {
            const double budget = 2.0 * rho * cfg.eps * cfg.eps +
                                  10.0 * state.rho_hat * cfg.eps * cfg.eps;
            CHECK(std::abs(state.high_order(i) - oracle.values(r + i)) <= budget);
        }
        CHECK(state.rho_hat >= rho * (1 - 1e-9));
    }
    CHECK(refreshed >= 1);
}

TEST_CASE("size hysteresis requires a persistent candidate") {
    // operator whose best successive ratio sits at r = 3 while tracking starts at 2
    DenseMatrix d = DenseMatrix::Zero(8, 8);
    d.diagonal() << 5.0, 4.8, 4.6, 1.0, 0.9, 0.8, 0.7, 0.6;
    const auto op = DenseOp::make(d, true);
    TrackerConfig cfg = basic_config(2, 3, 1e-6);
    cfg.adaptive_size = true;
    cfg.hysteresis_T = 3;
    cfg.r_min = 2;
    TrackerState state = init_tracker(op, cfg);
    REQUIRE(state.r() == 2);

    DenseMatrix nudge = DenseMatrix::Zero(8, 8);
    nudge(7, 7) = 1e-4; // small but above the skip threshold
    int resized_at = -1;
    for (int step = 1; step <= 5; ++step) {
        DenseMatrix e = nudge * static_cast<double>(step);
        const auto [next, report] = tracker_step(state, DenseOp::make(e, true));
        state = next;
        if (state.r() == 3 && resized_at < 0) resized_at = step;
    }
    CHECK(resized_at == 3); // exactly after hysteresis_T consecutive candidates
    CHECK(state.core.ritz_values.size() == 3);

    // the first two directions survive the grow-refresh on a static operator
    DenseMatrix truth(8, 2);
    truth.setZero();
    truth(0, 0) = 1;
    truth(1, 1) = 1;
    CHECK(subspace_distance(OrthonormalBasis(state.core.basis.matrix.leftCols(2)),
                            OrthonormalBasis(truth)) <= 1e-6);
}

TEST_CASE("broken candidate streak does not resize") {
    DenseMatrix d = DenseMatrix::Zero(8, 8);
    d.diagonal() << 5.0, 4.8, 4.6, 1.0, 0.9, 0.8, 0.7, 0.6;
    const auto op = DenseOp::make(d, true);
    TrackerConfig cfg = basic_config(3, 3, 1e-6); // matches the spectral break
    cfg.adaptive_size = true;
    cfg.hysteresis_T = 3;
    TrackerState state = init_tracker(op, cfg);
    REQUIRE(state.r() == 3);

    DenseMatrix nudge = DenseMatrix::Zero(8, 8);
    nudge(7, 7) = 1e-4;
    for (int step = 1; step <= 6; ++step) {
        const auto [next, report] = tracker_step(state, DenseOp::make(nudge * step, true));
        state = next;
        CHECK(state.r() == 3); // candidate equals r, streak clears every step
    }
}

TEST_CASE("e_norm is flagged as a lower estimate") {
    DenseMatrix d = DenseMatrix::Zero(5, 5);
    d.diagonal() << 5, 4, 3, 2, 1;
    const TrackerState state = init_tracker(DenseOp::make(d, true), basic_config());
    DenseMatrix bump = DenseMatrix::Zero(5, 5);
    bump(4, 4) = 0.05;
    const auto [next, report] = tracker_step(state, DenseOp::make(bump, true));
    CHECK(report.e_norm_is_lower_estimate);
    CHECK(report.e_norm <= 0.05 * (1 + 1e-9));
}
