#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>

#include "spectrack/operators.hpp"

namespace spectrack {

struct TimeSeries {
    Vector values;
    double sample_period = 1.0;
};

struct SSAConfig {
    Index window = 256;    // W
    Index length = 1024;   // N
    Index rank_cap = 0;    // 0: min(W, N - W + 1)
    double eps = 1e-3;
    Index step_size = 6; // samples per update
};

/// Sliding means: output[k] = mean(values[k*step .. k*step + window)).
TimeSeries moving_average(const TimeSeries& series, Index window, Index step);

/// Trajectory operator over the series with window W and 1/sqrt(N) scaling.
std::shared_ptr<const HankelTrajectoryOp> build_trajectory(const TimeSeries& series, Index window);

/// Inverts the trajectory map for a truncated SVD: forms sum_i sigma_i u_i v_i^T
/// implicitly, averages its antidiagonals and rescales by sqrt(N).
TimeSeries reconstruct(const OrthonormalBasis& left, const Vector& sigmas,
                       const OrthonormalBasis& right, Index n, Index window);

enum class PerturbationKind { DenseGaussian, RankOneSigned };

struct PerturbationModel {
    PerturbationKind kind = PerturbationKind::RankOneSigned;
    std::uint64_t seed = 0;
};

/// Draws a random perturbation operator: DenseGaussian has i.i.d. N(0, 1/n^2)
/// entries (not symmetrized); RankOneSigned is +/- z z^T with z_i ~ N(0, 1/n).
OpPtr sample_perturbation(const PerturbationModel& model, Index n);

/// (E + E^T) / 2 of a dense-backed square operator, for symmetric tracking.
OpPtr symmetrized(const OpPtr& op);

/// A-priori singular-subspace rotation bound under dense Gaussian noise:
/// (2/sqrt(n) + sqrt(r)/n) / (sigma_r - sigma_{r+1} - (C_A + log n)/n).
/// Throws GapTooSmall when the denominator is not positive.
double wedin_gaussian_bound(double sigma_r, double sigma_r1, Index n, Index r, double c_a);

/// A-priori subspace rotation bound under signed rank-one Gaussian updates:
/// ((1 + epsilon)/delta_r) * (sqrt(r/n) + sqrt(2 log n / n)); requires
/// delta_r > 2 + epsilon.
double lowrank_gaussian_bound(double delta_r, Index n, Index r, double epsilon);

struct SeriesLoadResult {
    TimeSeries series;
    long missing_filled = 0;
};

/// Single-column or `timestamp,value` CSV; missing values ('?' or empty) are
/// forward-filled and counted.
SeriesLoadResult load_series_csv(const std::string& path);
SeriesLoadResult load_series_csv(std::istream& in);

} // namespace spectrack
