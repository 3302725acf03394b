#pragma once

#include <string>

#include "spectrack/graph.hpp"
#include "spectrack/ssa.hpp"
#include "spectrack/tracker.hpp"

namespace spectrack {

/// Everything a reproducible experiment run needs. All randomness flows from
/// `seed`, split deterministically per component.
struct RunConfig {
    std::string command; // sbm-track | graph-track | pca-track | ssa-run | solve-once
    std::string input;
    std::string output;

    Index r = 5;
    Index q = 5;
    double eps = 1e-3;
    double tau = -1.0; // negative: auto (0 for SBM, 1 for small graphs, avg degree for large)
    int batch_size = 5;
    int hysteresis = 5;
    Method method = Method::SubspaceIteration;
    std::uint64_t seed = 0;
    long steps = -1; // negative: command default / until the stream ends
    bool oracle = false;
    Index oracle_threshold = 500;
    bool cold_start = false;
    double warm_fraction = 0.5;
    bool timings = false; // real wall-clock columns (off keeps CSV byte-deterministic)

    // sbm-track
    Index n = 400;
    int blocks_src = 5;
    int blocks_dst = 6;
    double p_in = 0.5;
    double p_out = 0.1;
    double h = 0.9;

    // pca-track
    std::string model = "rank-one"; // rank-one | dense-gaussian
    Index dim_d = 250;
    double bound_epsilon = 0.1; // epsilon in the rank-one bound
    double c_a = 1.0;           // matrix constant in the dense-Gaussian bound

    // ssa-run
    Index window = 256;
    Index series_len = 1024;
    Index step_size = 6;
    Index rank_cap = 0;
    Index ma_window = 0; // moving-average preprocessing of file input; 0 = off
    Index ma_step = 1;
};

struct RunResult {
    std::string csv;
    std::string summary_json;
    int exit_code = 0; // 0 ok, 1 input/parse error, 2 invariant violation
};

RunResult run_graph_track(const RunConfig& cfg);
RunResult run_sbm_track(const RunConfig& cfg);
RunResult run_pca_track(const RunConfig& cfg);
RunResult run_ssa(const RunConfig& cfg);
RunResult run_solve_once(const RunConfig& cfg);

/// Dispatch on cfg.command.
RunResult run(const RunConfig& cfg);

/// Timestamped edge stream of a planted-community graph, in the edge-file
/// format (`src dst timestamp`). Stand-in when no real dataset is available.
std::string synthetic_temporal_graph(Index n, int blocks, double p_in, double p_out,
                                     std::uint64_t seed);

/// Two incommensurate sinusoids plus white noise: numerical rank 4.
TimeSeries synthetic_rank4_series(Index length, double noise, std::uint64_t seed);

} // namespace spectrack
