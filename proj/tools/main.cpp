#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "spectrack/runners.hpp"

namespace {

int write_or_print(const std::string& path, const std::string& content, std::ostream& fallback) {
    if (path.empty()) {
        fallback << content;
        return 0;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot open output file: " << path << "\n";
        return 1;
    }
    out << content;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"incremental spectral subspace tracking experiments"};
    spectrack::RunConfig cfg;
    std::string method = "subspace";
    std::string summary_path;

    app.add_option("--command", cfg.command,
                   "sbm-track | graph-track | pca-track | ssa-run | solve-once")
        ->required();
    app.add_option("--input", cfg.input, "edge file / series CSV, command dependent");
    app.add_option("--output", cfg.output, "CSV output path (stdout when omitted)");
    app.add_option("--summary", summary_path, "summary JSON path (stderr when omitted)");
    app.add_option("--r", cfg.r, "tracked subspace size");
    app.add_option("--q", cfg.q, "oversampled eigenvalue estimates");
    app.add_option("--eps", cfg.eps, "target subspace accuracy");
    app.add_option("--tau", cfg.tau, "regularization (negative: auto)");
    app.add_option("--batch-size", cfg.batch_size, "edge edits per update");
    app.add_option("--hysteresis", cfg.hysteresis, "steps before a size change is applied");
    app.add_option("--method", method, "subspace | block-krylov");
    app.add_option("--seed", cfg.seed, "root seed");
    app.add_option("--steps", cfg.steps, "number of updates (negative: command default)");
    app.add_flag("--oracle", cfg.oracle, "dense-oracle diagnostics columns");
    app.add_option("--oracle-threshold", cfg.oracle_threshold,
                   "max dimension for oracle computations");
    app.add_flag("--cold-start", cfg.cold_start, "reseed the solver randomly at every step");
    app.add_option("--warm-fraction", cfg.warm_fraction, "fraction of earliest edges warmed up on");
    app.add_flag("--timings", cfg.timings, "emit real wall-clock columns");

    app.add_option("--n", cfg.n, "problem dimension (sbm/pca/solve-once)");
    app.add_option("--blocks-src", cfg.blocks_src, "source SBM communities");
    app.add_option("--blocks-dst", cfg.blocks_dst, "target SBM communities");
    app.add_option("--p-in", cfg.p_in, "intra-community edge probability");
    app.add_option("--p-out", cfg.p_out, "inter-community edge probability");
    app.add_option("--h-prob", cfg.h, "probability an edit moves toward the target graph");

    app.add_option("--model", cfg.model, "pca update model: rank-one | dense-gaussian");
    app.add_option("--dim-d", cfg.dim_d, "data dimension label for pca runs");
    app.add_option("--bound-epsilon", cfg.bound_epsilon, "epsilon in the rank-one bound");
    app.add_option("--c-a", cfg.c_a, "matrix constant in the dense-gaussian bound");

    app.add_option("--window", cfg.window, "SSA window W");
    app.add_option("--series-len", cfg.series_len, "SSA series length N");
    app.add_option("--step-size", cfg.step_size, "samples per SSA update");
    app.add_option("--rank-cap", cfg.rank_cap, "cap on the adaptive SSA rank");
    app.add_option("--ma-window", cfg.ma_window, "moving-average width for series input (0: off)");
    app.add_option("--ma-step", cfg.ma_step, "moving-average stride for series input");

    CLI11_PARSE(app, argc, argv);
    if (method == "block-krylov")
        cfg.method = spectrack::Method::BlockKrylov;
    else if (method == "subspace")
        cfg.method = spectrack::Method::SubspaceIteration;
    else {
        std::cerr << "unknown method: " << method << "\n";
        return 1;
    }

    spectrack::RunResult result;
    try {
        result = spectrack::run(cfg);
    } catch (const spectrack::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    if (const int rc = write_or_print(cfg.output, result.csv, std::cout); rc != 0) return rc;
    if (summary_path.empty()) {
        std::cerr << result.summary_json << "\n";
    } else if (const int rc = write_or_print(summary_path, result.summary_json, std::cerr); rc != 0) {
        return rc;
    }
    return result.exit_code;
}
