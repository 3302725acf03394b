#include "spectrack/ssa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spectrack/rng.hpp"

namespace spectrack {

TimeSeries moving_average(const TimeSeries& series, Index window, Index step) {
    const Index n = series.values.size();
    if (window < 1 || step < 1) throw InvalidConfig("window and step must be positive");
    if (window > n) throw WindowTooLarge("averaging window exceeds the series length");

    const Index count = (n - window) / step + 1;
    TimeSeries out;
    out.sample_period = series.sample_period * static_cast<double>(step);
    out.values.resize(count);
    for (Index k = 0; k < count; ++k)
        out.values(k) = series.values.segment(k * step, window).mean();
    return out;
}

std::shared_ptr<const HankelTrajectoryOp> build_trajectory(const TimeSeries& series, Index window) {
    const Index n = series.values.size();
    if (window < 2 || window > n) throw BadWindow("window must satisfy 2 <= W <= N");
    auto data = std::make_shared<const Vector>(series.values);
    return std::make_shared<const HankelTrajectoryOp>(std::move(data), window);
}

TimeSeries reconstruct(const OrthonormalBasis& left, const Vector& sigmas,
                       const OrthonormalBasis& right, Index n, Index window) {
    const Index k = n - window + 1;
    const Index r = sigmas.size();
    if (left.cols() != r || right.cols() != r)
        throw DimensionMismatch("factor ranks do not match the singular values");
    if (r > 0 && (left.rows() != window || right.rows() != k))
        throw DimensionMismatch("factor shapes do not match N and W");

    TimeSeries out;
    out.values = Vector::Zero(n);
    if (r == 0) return out;

    // antidiagonal sums of sum_i sigma_i u_i v_i^T are convolutions u_i * v_i
    Vector sums = Vector::Zero(n);
    for (Index c = 0; c < r; ++c) {
        const auto u = left.matrix.col(c);
        const auto v = right.matrix.col(c);
        for (Index i = 0; i < window; ++i) {
            const double w = sigmas(c) * u(i);
            for (Index j = 0; j < k; ++j) sums(i + j) += w * v(j);
        }
    }
    const double rescale = std::sqrt(static_cast<double>(n));
    for (Index t = 0; t < n; ++t) {
        const Index lo = std::max<Index>(0, t - k + 1);
        const Index hi = std::min<Index>(window - 1, t);
        out.values(t) = rescale * sums(t) / static_cast<double>(hi - lo + 1);
    }
    return out;
}

OpPtr sample_perturbation(const PerturbationModel& model, Index n) {
    if (n < 1) throw InvalidConfig("perturbation dimension must be positive");
    Rng rng(Rng::derive_seed(model.seed, 0x70657274));
    if (model.kind == PerturbationKind::DenseGaussian) {
        const double scale = 1.0 / static_cast<double>(n);
        DenseMatrix e(n, n);
        for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < n; ++i) e(i, j) = scale * rng.normal();
        return DenseOp::make(std::move(e), /*symmetric=*/false);
    }
    const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    Vector z(n);
    for (Index i = 0; i < n; ++i) z(i) = scale * rng.normal();
    return std::make_shared<RankOnePerturbationOp>(sign, std::move(z));
}

OpPtr symmetrized(const OpPtr& op) {
    const auto* dense = dynamic_cast<const DenseOp*>(op.get());
    if (dense == nullptr || dense->matrix().rows() != dense->matrix().cols())
        throw InvalidConfig("symmetrized expects a square dense-backed operator");
    DenseMatrix m = 0.5 * (dense->matrix() + dense->matrix().transpose());
    return DenseOp::make(std::move(m), /*symmetric=*/true);
}

double wedin_gaussian_bound(double sigma_r, double sigma_r1, Index n, Index r, double c_a) {
    if (n < 2 || r < 1) throw InvalidConfig("wedin_gaussian_bound expects n >= 2, r >= 1");
    const double nd = static_cast<double>(n);
    const double denom = sigma_r - sigma_r1 - (c_a + std::log(nd)) / nd;
    if (!(denom > 0.0)) throw GapTooSmall("singular value gap below the noise floor");
    const double numerator = 2.0 / std::sqrt(nd) + std::sqrt(static_cast<double>(r)) / nd;
    return numerator / denom;
}

double lowrank_gaussian_bound(double delta_r, Index n, Index r, double epsilon) {
    if (n < 2 || r < 1 || epsilon < 0.0)
        throw InvalidConfig("lowrank_gaussian_bound expects n >= 2, r >= 1, epsilon >= 0");
    if (!(delta_r > 2.0 + epsilon)) throw GapTooSmall("requires delta_r > 2 + epsilon");
    const double nd = static_cast<double>(n);
    const double width = std::sqrt(static_cast<double>(r) / nd) + std::sqrt(2.0 * std::log(nd) / nd);
    return (1.0 + epsilon) / delta_r * width;
}

SeriesLoadResult load_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open series file: " + path);
    return load_series_csv(in);
}

SeriesLoadResult load_series_csv(std::istream& in) {
    std::vector<double> values;
    long filled = 0;
    double last = 0.0;
    bool have_last = false;
    std::string line;
    long line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
        // trim
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        field = b == std::string::npos ? std::string() : field.substr(b, e - b + 1);

        if (field.empty() || field == "?") {
            if (!have_last) continue; // nothing to fill from yet
            values.push_back(last);
            ++filled;
            continue;
        }
        try {
            last = std::stod(field);
        } catch (const std::exception&) {
            // header or malformed line: tolerate once at the top, else fail
            if (line_number == 1) continue;
            throw ParseError("cannot parse value `" + field + "`", line_number);
        }
        have_last = true;
        values.push_back(last);
    }
    if (values.size() < 2) throw EmptyStream("series needs at least 2 samples");

    SeriesLoadResult out;
    out.series.values = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
    out.missing_filled = filled;
    return out;
}

} // namespace spectrack
