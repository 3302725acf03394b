#include "spectrack/runners.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "spectrack/rng.hpp"

namespace spectrack {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

double median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const size_t m = values.size() / 2;
    return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

constexpr const char* kCommonHeader =
    "step,e_norm,ev_norm,d_t,rho_t,kmax_bound,iterations_core,iterations_high,r,skipped,fell_back";

void append_common(std::string& csv, long step, const StepReport& rep) {
    csv += std::to_string(step);
    csv += ',';
    csv += fmt(rep.e_norm);
    csv += ',';
    csv += fmt(rep.ev_norm);
    csv += ',';
    csv += fmt(rep.d_t);
    csv += ',';
    csv += fmt(rep.rho_t);
    csv += ',';
    csv += std::to_string(rep.kmax_bound);
    csv += ',';
    csv += std::to_string(rep.iterations_core);
    csv += ',';
    csv += std::to_string(rep.iterations_high);
    csv += ',';
    csv += std::to_string(rep.r_after);
    csv += ',';
    csv += rep.skipped ? '1' : '0';
    csv += ',';
    csv += rep.fell_back_to_random ? '1' : '0';
}

void append_walls(std::string& csv, const StepReport& rep, bool timings) {
    csv += ',';
    csv += fmt(timings ? rep.wall_core_ms : 0.0);
    csv += ',';
    csv += fmt(timings ? rep.wall_high_ms : 0.0);
    csv += '\n';
}

DenseMatrix densify(const LinearOperator& op) {
    return op.apply_block(DenseMatrix::Identity(op.in_dim(), op.in_dim()));
}

struct DenseEig {
    Vector values; // descending
    DenseMatrix vectors;
};

DenseEig dense_eig(const DenseMatrix& sym) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(0.5 * (sym + sym.transpose()));
    DenseEig out;
    out.values = eig.eigenvalues().reverse();
    out.vectors = eig.eigenvectors().rowwise().reverse();
    return out;
}

OrthonormalBasis top_basis(const DenseEig& eig, Index r) {
    return OrthonormalBasis(eig.vectors.leftCols(r));
}

/// kmax bound recomputed with exact eigenvalues (estimate-error terms zero).
int bound_with_oracle_values(const StepReport& rep, double lam_r, double lam_r1, double rho,
                             double eps, const TrackerConfig& tcfg) {
    const DkProxy dk = davis_kahan_proxy(rep.e_norm, rep.ev_norm, lam_r, lam_r1, 0.0, rho);
    if (dk.d_t <= eps) return 0;
    double rho_t = 0.0;
    bool have_rho = false;
    try {
        rho_t = convergence_ratio(lam_r, lam_r1, rep.e_norm, 0.0, rho);
        have_rho = true;
    } catch (const NonpositiveDenominator&) {
    }
    if (dk.applicable && dk.d_t < 1.0 && have_rho && rho_t > 1.0)
        return std::max(1, kmax_warm(dk.d_t, rho_t, eps, tcfg.method));
    const double gamma = have_rho && rho_t > 1.0 ? rho_t - 1.0 : tcfg.gamma_floor;
    return std::max(1, kmax_gaussian(gamma, eps, tcfg.kmax_constant, tcfg.method));
}

TrackerConfig tracker_config_from(const RunConfig& cfg) {
    TrackerConfig t;
    t.r = cfg.r;
    t.q = cfg.q;
    t.eps = cfg.eps;
    t.method = cfg.method;
    t.hysteresis_T = cfg.hysteresis;
    t.cold_start = cfg.cold_start;
    t.seed = Rng::derive_seed(cfg.seed, 0x747261636b);
    return t;
}

json config_echo(const RunConfig& cfg) {
    return json{{"command", cfg.command},
                {"r", cfg.r},
                {"q", cfg.q},
                {"eps", cfg.eps},
                {"tau", cfg.tau},
                {"batch_size", cfg.batch_size},
                {"hysteresis", cfg.hysteresis},
                {"method", cfg.method == Method::SubspaceIteration ? "subspace" : "block-krylov"},
                {"seed", cfg.seed},
                {"steps", cfg.steps},
                {"oracle", cfg.oracle},
                {"cold_start", cfg.cold_start},
                {"warm_fraction", cfg.warm_fraction}};
}

struct RowStats {
    long total = 0;
    long skipped = 0;
    long fallbacks = 0;
    long bound_violations = 0;
    std::vector<double> iterations_core;
    std::vector<double> kmax_bounds;

    void add(const StepReport& rep) {
        ++total;
        if (rep.skipped) ++skipped;
        if (rep.fell_back_to_random) ++fallbacks;
        if (!rep.skipped) {
            iterations_core.push_back(rep.iterations_core);
            kmax_bounds.push_back(rep.kmax_bound);
            if (!rep.fell_back_to_random && rep.iterations_core > rep.kmax_bound)
                ++bound_violations;
        }
    }

    json to_json() const {
        return json{{"steps", total},
                    {"skipped", skipped},
                    {"fallbacks", fallbacks},
                    {"bound_violations", bound_violations},
                    {"median_iterations_core", median(iterations_core)},
                    {"median_kmax_bound", median(kmax_bounds)}};
    }
};

struct SbmEdits {
    EdgeBatch batch;
    bool exhausted = false;
};

/// Draws `count` distinct-pair edits of the interpolation process.
SbmEdits draw_edit_batch(const GraphState& current, const GraphState& target, double h, int count,
                         Rng& rng) {
    SbmEdits out;
    std::set<Edge> used;
    for (int k = 0; k < count; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
            EdgeBatch single;
            try {
                single = interpolation_step(current, target, h, rng);
            } catch (const Exhausted&) {
                out.exhausted = true;
                return out;
            }
            const Edge e = single.additions.empty() ? single.deletions.front()
                                                    : single.additions.front();
            if (!used.insert(e).second) continue;
            if (single.additions.empty())
                out.batch.deletions.push_back(e);
            else
                out.batch.additions.push_back(e);
            placed = true;
        }
        if (!placed) {
            out.exhausted = true;
            return out;
        }
    }
    return out;
}

} // namespace

RunResult run_sbm_track(const RunConfig& cfg) {
    RunResult result;
    const double tau = cfg.tau < 0.0 ? 0.0 : cfg.tau;
    Rng rng(Rng::derive_seed(cfg.seed, 0x73626d72));

    SBMConfig src_cfg{cfg.n, cfg.blocks_src, cfg.p_in, cfg.p_out, Rng::derive_seed(cfg.seed, 1)};
    SBMConfig dst_cfg{cfg.n, cfg.blocks_dst, cfg.p_in, cfg.p_out, Rng::derive_seed(cfg.seed, 2)};
    GraphState current = sample_sbm(src_cfg, tau);
    const GraphState target = sample_sbm(dst_cfg, tau);

    TrackerConfig tcfg = tracker_config_from(cfg);
    TrackerState tracker = init_tracker(current.normalized(), tcfg);

    const bool with_oracle = cfg.oracle && cfg.n <= cfg.oracle_threshold;
    DenseEig prev_eig;
    double prev_rho = 0.0;
    if (with_oracle) {
        prev_eig = dense_eig(densify(*current.normalized()));
        prev_rho = prev_eig.values.cwiseAbs().maxCoeff();
    }

    std::string csv = std::string(kCommonHeader) +
                      ",alpha,dist_oracle,kmax_bound_oracle,wall_core_ms,wall_high_ms\n";
    RowStats stats;
    bool reached_target = false;
    std::vector<double> alphas;
    std::vector<double> bound_rel_diffs;

    const long steps = cfg.steps < 0 ? 200 : cfg.steps;
    for (long step = 1; step <= steps; ++step) {
        const SbmEdits edits = draw_edit_batch(current, target, cfg.h, cfg.batch_size, rng);
        if (edits.exhausted) {
            reached_target = true;
            break;
        }
        const BatchResult applied = apply_batch(current, edits.batch);
        auto [next_tracker, rep] =
            tracker_step(tracker, applied.perturbation, applied.state.normalized());

        double dist_oracle = std::numeric_limits<double>::quiet_NaN();
        int oracle_bound = 0;
        if (with_oracle) {
            oracle_bound =
                bound_with_oracle_values(rep, prev_eig.values(next_tracker.r() - 1),
                                         prev_eig.values(next_tracker.r()), prev_rho, cfg.eps, tcfg);
            const DenseEig now = dense_eig(densify(*applied.state.normalized()));
            dist_oracle =
                subspace_distance(next_tracker.core.basis, top_basis(now, next_tracker.r()));
            prev_eig = now;
            prev_rho = now.values.cwiseAbs().maxCoeff();
            if (!rep.skipped && rep.kmax_bound > 0 && oracle_bound > 0)
                bound_rel_diffs.push_back(std::abs(rep.kmax_bound - oracle_bound) /
                                          static_cast<double>(oracle_bound));
        }

        append_common(csv, step, rep);
        csv += ',';
        csv += fmt(applied.alpha);
        csv += ',';
        csv += fmt(dist_oracle);
        csv += ',';
        csv += std::to_string(oracle_bound);
        append_walls(csv, rep, cfg.timings);

        stats.add(rep);
        alphas.push_back(applied.alpha);
        tracker = std::move(next_tracker);
        current = applied.state;
    }

    json summary = stats.to_json();
    summary["config"] = config_echo(cfg);
    summary["reached_target"] = reached_target;
    summary["max_alpha"] = alphas.empty() ? 0.0 : *std::max_element(alphas.begin(), alphas.end());
    summary["median_bound_rel_diff"] = median(bound_rel_diffs);
    result.csv = std::move(csv);
    result.summary_json = summary.dump(2);
    result.exit_code = stats.bound_violations > 0 ? 2 : 0;
    return result;
}

RunResult run_graph_track(const RunConfig& cfg) {
    RunResult result;
    TemporalEdgeList stream;
    try {
        stream = load_temporal_edges(cfg.input);
    } catch (const Error& e) {
        result.summary_json = json{{"error", e.what()}}.dump(2);
        result.exit_code = 1;
        return result;
    }

    // static graph -> largest component -> filtered stream
    std::vector<Edge> all_edges;
    all_edges.reserve(stream.edges.size());
    for (const auto& e : stream.edges) all_edges.emplace_back(e.u, e.v);
    const double tau_guess = cfg.tau >= 0.0 ? cfg.tau : (stream.n < 10000 ? 1.0 : -1.0);
    GraphState full = make_graph_state(SparseSymmetric::from_edges(stream.n, all_edges),
                                       tau_guess >= 0.0 ? tau_guess : 1.0);
    const ComponentResult lcc = largest_connected_component(full);
    const Index n = lcc.state.n;
    double tau = cfg.tau;
    if (tau < 0.0) tau = n < 10000 ? 1.0 : lcc.state.raw_degrees.mean();

    std::vector<TemporalEdge> kept;
    kept.reserve(stream.edges.size());
    for (const auto& e : stream.edges) {
        const Index u = lcc.relabeling[e.u];
        const Index v = lcc.relabeling[e.v];
        if (u >= 0 && v >= 0) kept.push_back({u, v, e.timestamp});
    }

    const long warm_count = static_cast<long>(cfg.warm_fraction * static_cast<double>(kept.size()));
    std::vector<Edge> warm_edges;
    for (long i = 0; i < warm_count; ++i) warm_edges.emplace_back(kept[i].u, kept[i].v);
    GraphState current = make_graph_state(SparseSymmetric::from_edges(n, warm_edges), tau);

    TrackerConfig tcfg = tracker_config_from(cfg);
    TrackerState tracker = init_tracker(current.normalized(), tcfg);

    const bool with_oracle = cfg.oracle && n <= cfg.oracle_threshold;

    std::string csv = std::string(kCommonHeader) + ",alpha,dist_oracle,wall_core_ms,wall_high_ms\n";
    RowStats stats;
    std::vector<double> oracle_dists;

    long step = 0;
    const long max_steps = cfg.steps;
    for (size_t pos = warm_count; pos < kept.size();) {
        if (max_steps >= 0 && step >= max_steps) break;
        EdgeBatch batch;
        while (pos < kept.size() && static_cast<int>(batch.additions.size()) < cfg.batch_size) {
            if (batch.additions.empty()) batch.t_min = kept[pos].timestamp;
            batch.additions.emplace_back(kept[pos].u, kept[pos].v);
            batch.t_max = kept[pos].timestamp;
            ++pos;
        }
        if (batch.empty()) break;
        ++step;

        const BatchResult applied = apply_batch(current, batch);
        auto [next_tracker, rep] =
            tracker_step(tracker, applied.perturbation, applied.state.normalized());

        double dist_oracle = std::numeric_limits<double>::quiet_NaN();
        if (with_oracle) {
            const DenseEig now = dense_eig(densify(*applied.state.normalized()));
            dist_oracle =
                subspace_distance(next_tracker.core.basis, top_basis(now, next_tracker.r()));
            oracle_dists.push_back(dist_oracle);
        }

        append_common(csv, step, rep);
        csv += ',';
        csv += fmt(applied.alpha);
        csv += ',';
        csv += fmt(dist_oracle);
        append_walls(csv, rep, cfg.timings);
        stats.add(rep);

        tracker = std::move(next_tracker);
        current = applied.state;
    }

    json summary = stats.to_json();
    summary["config"] = config_echo(cfg);
    summary["n"] = n;
    summary["edges_total"] = kept.size();
    summary["warm_edges"] = warm_count;
    summary["max_dist_oracle"] =
        oracle_dists.empty() ? 0.0 : *std::max_element(oracle_dists.begin(), oracle_dists.end());
    result.csv = std::move(csv);
    result.summary_json = summary.dump(2);
    result.exit_code = stats.bound_violations > 0 ? 2 : 0;
    return result;
}

namespace {

/// Planted rectangular matrix with prescribed singular values and a gap at r.
DenseMatrix planted_rectangular(Index n, Index r, std::uint64_t seed) {
    Vector sigma(n);
    for (Index i = 0; i < n; ++i) {
        if (i < r)
            sigma(i) = 1.0 - 0.45 * static_cast<double>(i) / std::max<Index>(r - 1, 1);
        else
            sigma(i) = 0.3 * std::pow(0.97, static_cast<double>(i - r));
    }
    const OrthonormalBasis u = random_orthonormal_init(n, n, Rng::derive_seed(seed, 11));
    const OrthonormalBasis v = random_orthonormal_init(n, n, Rng::derive_seed(seed, 12));
    return u.matrix * sigma.asDiagonal() * v.matrix.transpose();
}

/// Planted PSD matrix whose top-r eigenvalues are well separated from a
/// decaying tail (gap above 2, as the rank-one bound requires).
DenseMatrix planted_covariance(Index n, Index r, std::uint64_t seed) {
    Vector lambda(n);
    for (Index i = 0; i < n; ++i) {
        if (i < r)
            lambda(i) = 12.0 - 7.5 * static_cast<double>(i) / std::max<Index>(r - 1, 1);
        else
            lambda(i) = 2.0 * std::pow(0.9, static_cast<double>(i - r));
    }
    const OrthonormalBasis q = random_orthonormal_init(n, n, Rng::derive_seed(seed, 13));
    return q.matrix * lambda.asDiagonal() * q.matrix.transpose();
}

struct SvdPair {
    DenseMatrix u, v;
    Vector s;
};

SvdPair dense_svd(const DenseMatrix& a) {
    Eigen::BDCSVD<DenseMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixU(), svd.matrixV(), svd.singularValues()};
}

OrthonormalBasis dilated_singular_basis(const SvdPair& svd, Index r) {
    const Index m = svd.u.rows();
    const Index n = svd.v.rows();
    DenseMatrix w(m + n, r);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    w.topRows(m) = inv_sqrt2 * svd.u.leftCols(r);
    w.bottomRows(n) = inv_sqrt2 * svd.v.leftCols(r);
    return OrthonormalBasis(std::move(w));
}

} // namespace

RunResult run_pca_track(const RunConfig& cfg) {
    RunResult result;
    const bool dense_model = cfg.model == "dense-gaussian";
    const Index n = cfg.n;
    const long steps = cfg.steps < 0 ? 50 : cfg.steps;
    const bool with_oracle = cfg.oracle && n <= cfg.oracle_threshold;

    DenseMatrix a = dense_model ? planted_rectangular(n, cfg.r, cfg.seed)
                                : planted_covariance(n, cfg.r, cfg.seed);

    double shift = 0.0;
    auto make_op = [&](const DenseMatrix& m) -> OpPtr {
        if (!dense_model) return DenseOp::make(m, /*symmetric=*/true);
        return ShiftedOp::make(build_dilation(DenseOp::make(m)), shift);
    };
    if (dense_model) {
        const NormEstimate top =
            spectral_norm_estimate(*DenseOp::make(a), 1e-4, 300, Rng::derive_seed(cfg.seed, 21));
        shift = 1.5 * std::max(top.value, 1e-6);
    }

    TrackerConfig tcfg = tracker_config_from(cfg);
    tcfg.value_shift = dense_model ? shift : 0.0;
    tcfg.r_cap = static_cast<Index>(std::sqrt(static_cast<double>(n)));
    TrackerState tracker = init_tracker(make_op(a), tcfg);

    SvdPair prev_svd;
    DenseEig prev_eig;
    if (with_oracle) {
        if (dense_model)
            prev_svd = dense_svd(a);
        else
            prev_eig = dense_eig(a);
    }

    std::string csv = std::string(kCommonHeader) +
                      ",bound_prior,dist_step_true,dist_oracle,wall_core_ms,wall_high_ms\n";
    RowStats stats;
    long bound_hits = 0;
    long bound_rows = 0;

    for (long step = 1; step <= steps; ++step) {
        PerturbationModel model{dense_model ? PerturbationKind::DenseGaussian
                                            : PerturbationKind::RankOneSigned,
                                Rng::derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(step))};
        const OpPtr raw = sample_perturbation(model, n);

        OpPtr update;
        DenseMatrix a_next = a;
        if (dense_model) {
            const auto* dense = dynamic_cast<const DenseOp*>(raw.get());
            a_next += dense->matrix();
            update = build_dilation(raw);
        } else {
            const auto* rank_one = dynamic_cast<const RankOnePerturbationOp*>(raw.get());
            a_next += rank_one->sign() * rank_one->vector() * rank_one->vector().transpose();
            update = raw;
        }

        // a-priori bound from the current tracked values (reporting frame)
        const Vector values = tracker.tracked_values();
        double bound_prior = std::numeric_limits<double>::quiet_NaN();
        try {
            if (dense_model)
                bound_prior = wedin_gaussian_bound(values(tracker.r() - 1), values(tracker.r()), n,
                                                   tracker.r(), cfg.c_a);
            else
                bound_prior = lowrank_gaussian_bound(values(tracker.r() - 1) - values(tracker.r()),
                                                     n, tracker.r(), cfg.bound_epsilon);
        } catch (const GapTooSmall&) {
        }

        auto [next_tracker, rep] = tracker_step(tracker, update, make_op(a_next));

        double dist_step_true = std::numeric_limits<double>::quiet_NaN();
        double dist_oracle = std::numeric_limits<double>::quiet_NaN();
        if (with_oracle) {
            const Index r_now = next_tracker.r();
            if (dense_model) {
                const SvdPair now = dense_svd(a_next);
                const double left = subspace_distance(OrthonormalBasis(prev_svd.u.leftCols(r_now)),
                                                      OrthonormalBasis(now.u.leftCols(r_now)));
                const double right = subspace_distance(OrthonormalBasis(prev_svd.v.leftCols(r_now)),
                                                       OrthonormalBasis(now.v.leftCols(r_now)));
                dist_step_true = std::max(left, right);
                dist_oracle =
                    subspace_distance(next_tracker.core.basis, dilated_singular_basis(now, r_now));
                prev_svd = now;
            } else {
                const DenseEig now = dense_eig(a_next);
                dist_step_true = subspace_distance(top_basis(prev_eig, r_now), top_basis(now, r_now));
                dist_oracle = subspace_distance(next_tracker.core.basis, top_basis(now, r_now));
                prev_eig = now;
            }
            if (!std::isnan(bound_prior)) {
                ++bound_rows;
                if (bound_prior >= dist_step_true) ++bound_hits;
            }
        }

        append_common(csv, step, rep);
        csv += ',';
        csv += fmt(bound_prior);
        csv += ',';
        csv += fmt(dist_step_true);
        csv += ',';
        csv += fmt(dist_oracle);
        append_walls(csv, rep, cfg.timings);
        stats.add(rep);

        tracker = std::move(next_tracker);
        a = std::move(a_next);
    }

    json summary = stats.to_json();
    summary["config"] = config_echo(cfg);
    summary["model"] = cfg.model;
    summary["bound_rows"] = bound_rows;
    summary["bound_majorized"] = bound_hits;
    result.csv = std::move(csv);
    result.summary_json = summary.dump(2);
    result.exit_code = stats.bound_violations > 0 ? 2 : 0;
    return result;
}

RunResult run_ssa(const RunConfig& cfg) {
    RunResult result;
    const Index n_window = cfg.series_len;
    const Index w = cfg.window;
    long steps = cfg.steps < 0 ? 100 : cfg.steps;

    TimeSeries series;
    if (!cfg.input.empty()) {
        try {
            series = load_series_csv(cfg.input).series;
            if (cfg.ma_window > 0) series = moving_average(series, cfg.ma_window, cfg.ma_step);
        } catch (const Error& e) {
            result.summary_json = json{{"error", e.what()}}.dump(2);
            result.exit_code = 1;
            return result;
        }
        const long available =
            (static_cast<long>(series.values.size()) - n_window) / cfg.step_size;
        steps = std::min(steps, std::max(0L, available));
    } else {
        series = synthetic_rank4_series(n_window + cfg.step_size * steps, 0.01,
                                        Rng::derive_seed(cfg.seed, 31));
    }
    if (series.values.size() < n_window)
        throw BadWindow("series shorter than the configured length");

    const Index k_cols = n_window - w + 1;
    TimeSeries head{series.values.head(n_window), series.sample_period};
    auto hankel_prev = build_trajectory(head, w);
    const NormEstimate top = spectral_norm_estimate(*build_dilation(hankel_prev), 1e-4, 300,
                                                    Rng::derive_seed(cfg.seed, 32));
    const double shift = 1.5 * std::max(top.value, 1e-9);

    TrackerConfig tcfg = tracker_config_from(cfg);
    tcfg.value_shift = shift;
    tcfg.r_cap = cfg.rank_cap > 0 ? cfg.rank_cap : std::min(w, k_cols);
    TrackerState tracker = init_tracker(ShiftedOp::make(build_dilation(hankel_prev), shift), tcfg);

    // ||C||_F^2 of the current trajectory matrix, directly from the series
    auto frob_sq = [&](const Vector& seg) {
        double acc = 0.0;
        for (Index t = 0; t < n_window; ++t) {
            const Index count = std::min({t + 1, w, k_cols, n_window - t});
            acc += static_cast<double>(count) * seg(t) * seg(t);
        }
        return acc / static_cast<double>(n_window);
    };

    std::string csv = std::string(kCommonHeader) +
                      ",matvecs,sigma_energy,recon_rmse,wall_core_ms,wall_high_ms\n";
    RowStats stats;
    std::vector<double> matvec_counts;
    std::vector<double> energies;

    for (long step = 1; step <= steps; ++step) {
        const Vector seg = series.values.segment(step * cfg.step_size, n_window);
        TimeSeries current{seg, series.sample_period};
        auto hankel = build_trajectory(current, w);
        const OpPtr update = build_dilation(CombinedOp::difference(hankel, hankel_prev));
        const OpPtr replacement = ShiftedOp::make(build_dilation(hankel), shift);

        auto [next_tracker, rep] = tracker_step(tracker, update, replacement);

        const Index r_now = next_tracker.r();
        const Vector sigmas = next_tracker.core.ritz_values.array() - shift;
        const double energy =
            std::sqrt(std::min(1.0, sigmas.squaredNorm() / std::max(frob_sq(seg), 1e-300)));

        // split the dilated basis into singular vector estimates
        DenseMatrix left(w, r_now), right(k_cols, r_now);
        for (Index c = 0; c < r_now; ++c) {
            Vector col = next_tracker.core.basis.matrix.col(c);
            Vector u = col.head(w);
            Vector v = col.tail(k_cols);
            const double un = u.norm(), vn = v.norm();
            left.col(c) = un > 0 ? Vector(u / un) : u;
            right.col(c) = vn > 0 ? Vector(v / vn) : v;
        }
        const TimeSeries recon = reconstruct(OrthonormalBasis(left), sigmas,
                                             OrthonormalBasis(right), n_window, w);
        const double rmse = std::sqrt((recon.values - seg).squaredNorm() /
                                      static_cast<double>(n_window)) /
                            std::max(1e-300, std::sqrt(seg.squaredNorm() /
                                                       static_cast<double>(n_window)));

        append_common(csv, step, rep);
        csv += ',';
        csv += std::to_string(rep.matvecs_core);
        csv += ',';
        csv += fmt(energy);
        csv += ',';
        csv += fmt(rmse);
        append_walls(csv, rep, cfg.timings);
        stats.add(rep);
        matvec_counts.push_back(static_cast<double>(rep.matvecs_core));
        energies.push_back(energy);

        tracker = std::move(next_tracker);
        hankel_prev = hankel;
    }

    json summary = stats.to_json();
    summary["config"] = config_echo(cfg);
    summary["mean_matvecs_core"] =
        matvec_counts.empty()
            ? 0.0
            : std::accumulate(matvec_counts.begin(), matvec_counts.end(), 0.0) /
                  static_cast<double>(matvec_counts.size());
    summary["min_sigma_energy"] =
        energies.empty() ? 0.0 : *std::min_element(energies.begin(), energies.end());
    summary["final_r"] = tracker.r();
    result.csv = std::move(csv);
    result.summary_json = summary.dump(2);
    result.exit_code = stats.bound_violations > 0 ? 2 : 0;
    return result;
}

RunResult run_solve_once(const RunConfig& cfg) {
    RunResult result;
    OpPtr op;
    if (!cfg.input.empty()) {
        TemporalEdgeList stream;
        try {
            stream = load_temporal_edges(cfg.input);
        } catch (const Error& e) {
            result.summary_json = json{{"error", e.what()}}.dump(2);
            result.exit_code = 1;
            return result;
        }
        std::vector<Edge> edges;
        for (const auto& e : stream.edges) edges.emplace_back(e.u, e.v);
        GraphState full = make_graph_state(SparseSymmetric::from_edges(stream.n, edges),
                                           cfg.tau >= 0.0 ? cfg.tau : 1.0);
        op = largest_connected_component(full).state.normalized();
    } else {
        op = DenseOp::make(planted_covariance(cfg.n, cfg.r, cfg.seed), /*symmetric=*/true);
    }

    SolverConfig scfg;
    scfg.method = cfg.method;
    scfg.target_r = cfg.r;
    scfg.block = cfg.r;
    scfg.k_max = cfg.steps > 0 ? static_cast<int>(cfg.steps) : 500;
    scfg.tol = cfg.eps;
    scfg.seed = Rng::derive_seed(cfg.seed, 41);
    const OrthonormalBasis v0 =
        random_orthonormal_init(op->in_dim(), cfg.r, Rng::derive_seed(cfg.seed, 42));
    const SolveResult res = solve(*op, v0, scfg);

    std::string csv = "n,r,iterations,converged,max_residual\n";
    csv += std::to_string(op->in_dim()) + ',' + std::to_string(cfg.r) + ',' +
           std::to_string(res.iterations_used) + ',' + (res.converged ? "1" : "0") + ',' +
           fmt(res.residual_norms.maxCoeff()) + '\n';

    json summary;
    summary["config"] = config_echo(cfg);
    summary["iterations"] = res.iterations_used;
    summary["converged"] = res.converged;
    std::vector<double> values(res.ritz_values.data(), res.ritz_values.data() + res.ritz_values.size());
    summary["ritz_values"] = values;
    result.csv = std::move(csv);
    result.summary_json = summary.dump(2);
    return result;
}

RunResult run(const RunConfig& cfg) {
    if (cfg.command == "sbm-track") return run_sbm_track(cfg);
    if (cfg.command == "graph-track") return run_graph_track(cfg);
    if (cfg.command == "pca-track") return run_pca_track(cfg);
    if (cfg.command == "ssa-run") return run_ssa(cfg);
    if (cfg.command == "solve-once") return run_solve_once(cfg);
    RunResult result;
    result.summary_json = json{{"error", "unknown command: " + cfg.command}}.dump(2);
    result.exit_code = 1;
    return result;
}

std::string synthetic_temporal_graph(Index n, int blocks, double p_in, double p_out,
                                     std::uint64_t seed) {
    SBMConfig sbm{n, blocks, p_in, p_out, Rng::derive_seed(seed, 51)};
    const GraphState g = sample_sbm(sbm, 1.0);
    auto edges = g.adjacency->edge_list();

    // random arrival order
    Rng rng(Rng::derive_seed(seed, 52));
    for (size_t i = edges.size(); i > 1; --i) std::swap(edges[i - 1], edges[rng.integer(i)]);

    std::string out;
    out += "# synthetic temporal stream\n";
    long long t = 0;
    for (const auto& [u, v] : edges) {
        out += std::to_string(u) + ' ' + std::to_string(v) + ' ' + std::to_string(++t) + '\n';
    }
    return out;
}

TimeSeries synthetic_rank4_series(Index length, double noise, std::uint64_t seed) {
    Rng rng(Rng::derive_seed(seed, 53));
    TimeSeries out;
    out.values.resize(length);
    for (Index t = 0; t < length; ++t) {
        const double x = static_cast<double>(t);
        out.values(t) = std::sin(2.0 * std::numbers::pi * x / 64.0) +
                        0.8 * std::sin(2.0 * std::numbers::pi * x / 23.0 + 1.3) +
                        noise * rng.normal();
    }
    return out;
}

} // namespace spectrack
