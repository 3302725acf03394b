#include "spectrack/operators.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace spectrack {

namespace {

void check_vertex(Index n, Index u) {
    if (u < 0 || u >= n) throw DimensionMismatch("vertex index out of range");
}

} // namespace

SparseSymmetric SparseSymmetric::from_edges(Index n,
                                            const std::vector<std::pair<Index, Index>>& edges) {
    std::vector<std::tuple<Index, Index, double>> triplets;
    triplets.reserve(edges.size());
    for (const auto& [u, v] : edges) {
        if (u == v) throw InvalidEdit("self-loops are not allowed");
        triplets.emplace_back(u, v, 1.0);
    }
    return from_triplets(n, triplets);
}

SparseSymmetric SparseSymmetric::from_triplets(
    Index n, const std::vector<std::tuple<Index, Index, double>>& triplets) {
    SparseSymmetric out;
    out.n_ = n;

    std::vector<std::vector<std::pair<Index, double>>> rows(n);
    for (const auto& [i, j, w] : triplets) {
        check_vertex(n, i);
        check_vertex(n, j);
        if (w == 0.0) continue;
        rows[i].emplace_back(j, w);
        if (i != j) rows[j].emplace_back(i, w);
    }
    out.row_ptr_.assign(n + 1, 0);
    for (Index i = 0; i < n; ++i) {
        std::sort(rows[i].begin(), rows[i].end());
        out.row_ptr_[i + 1] = out.row_ptr_[i] + static_cast<Index>(rows[i].size());
    }
    out.col_.reserve(out.row_ptr_[n]);
    out.val_.reserve(out.row_ptr_[n]);
    for (Index i = 0; i < n; ++i) {
        for (const auto& [j, w] : rows[i]) {
            out.col_.push_back(j);
            out.val_.push_back(w);
        }
    }
    return out;
}

Vector SparseSymmetric::multiply(const Vector& x) const {
    if (x.size() != n_) throw DimensionMismatch("sparse matvec: length mismatch");
    Vector y = Vector::Zero(n_);
    for (Index i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) acc += val_[p] * x(col_[p]);
        y(i) = acc;
    }
    return y;
}

Vector SparseSymmetric::row_sums() const {
    Vector s = Vector::Zero(n_);
    for (Index i = 0; i < n_; ++i)
        for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s(i) += val_[p];
    return s;
}

bool SparseSymmetric::has_edge(Index u, Index v) const {
    check_vertex(n_, u);
    check_vertex(n_, v);
    const auto begin = col_.begin() + row_ptr_[u];
    const auto end = col_.begin() + row_ptr_[u + 1];
    return std::binary_search(begin, end, v);
}

SparseSymmetric SparseSymmetric::with_edges_toggled(
    const std::vector<std::pair<Index, Index>>& additions,
    const std::vector<std::pair<Index, Index>>& deletions) const {
    auto edges = edge_list();
    std::vector<std::pair<Index, Index>> normalized;
    normalized.reserve(edges.size() + additions.size());

    auto key = [](std::pair<Index, Index> e) {
        return e.first < e.second ? e : std::make_pair(e.second, e.first);
    };
    std::vector<std::pair<Index, Index>> to_delete;
    to_delete.reserve(deletions.size());
    for (const auto& e : deletions) to_delete.push_back(key(e));
    std::sort(to_delete.begin(), to_delete.end());

    for (const auto& e : edges) {
        if (!std::binary_search(to_delete.begin(), to_delete.end(), e)) normalized.push_back(e);
    }
    for (const auto& e : additions) normalized.push_back(key(e));
    return from_edges(n_, normalized);
}

DenseMatrix SparseSymmetric::to_dense() const {
    DenseMatrix m = DenseMatrix::Zero(n_, n_);
    for (Index i = 0; i < n_; ++i)
        for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) m(i, col_[p]) = val_[p];
    return m;
}

std::vector<std::pair<Index, Index>> SparseSymmetric::edge_list() const {
    std::vector<std::pair<Index, Index>> edges;
    edges.reserve(col_.size() / 2);
    for (Index i = 0; i < n_; ++i)
        for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
            if (i < col_[p]) edges.emplace_back(i, col_[p]);
    return edges;
}

NormalizedAdjacencyOp::NormalizedAdjacencyOp(std::shared_ptr<const SparseSymmetric> adjacency,
                                             Vector degrees, double tau)
    : adjacency_(std::move(adjacency)), degrees_(std::move(degrees)), tau_(tau),
      n_(adjacency_->size()) {
    if (degrees_.size() != n_) throw DimensionMismatch("degree vector length mismatch");
    inv_sqrt_deg_.resize(n_);
    for (Index i = 0; i < n_; ++i) {
        if (degrees_(i) <= 0.0) throw IsolatedVertex("vertex " + std::to_string(i) + " has nonpositive regularized degree");
        inv_sqrt_deg_(i) = 1.0 / std::sqrt(degrees_(i));
    }
}

Vector NormalizedAdjacencyOp::apply(const Vector& x) const {
    check_input(x);
    const Vector u = x.cwiseProduct(inv_sqrt_deg_);
    Vector y = adjacency_->multiply(u);
    if (tau_ > 0.0) y.array() += (tau_ / static_cast<double>(n_)) * u.sum();
    return y.cwiseProduct(inv_sqrt_deg_);
}

DenseMatrix NormalizedAdjacencyOp::to_dense() const {
    DenseMatrix a = adjacency_->to_dense();
    if (tau_ > 0.0) a.array() += tau_ / static_cast<double>(n_);
    DenseMatrix d = inv_sqrt_deg_.asDiagonal();
    return d * a * d;
}

std::shared_ptr<const NormalizedAdjacencyOp>
build_normalized_adjacency(std::shared_ptr<const SparseSymmetric> adjacency, double tau,
                           DegreeMode mode) {
    if (tau < 0.0) throw InvalidConfig("tau must be nonnegative");
    Vector degrees = adjacency->row_sums();
    if (mode == DegreeMode::Regularized) degrees.array() += tau;
    for (Index i = 0; i < degrees.size(); ++i)
        if (degrees(i) <= 0.0)
            throw IsolatedVertex("vertex " + std::to_string(i) + " has zero scaling degree");
    return std::make_shared<NormalizedAdjacencyOp>(std::move(adjacency), std::move(degrees), tau);
}

DeflatedOp::DeflatedOp(OpPtr base, OrthonormalBasis locked)
    : base_(std::move(base)), locked_(std::move(locked)) {
    if (!base_->is_symmetric()) throw NotSymmetric("deflation expects a symmetric base");
    if (locked_.rows() != base_->in_dim()) throw DimensionMismatch("locked basis has wrong height");
}

Vector DeflatedOp::apply(const Vector& x) const {
    check_input(x);
    const DenseMatrix& v = locked_.matrix;
    Vector p = x - v * (v.transpose() * x);
    Vector y = base_->apply(p);
    y -= v * (v.transpose() * y);
    return y;
}

DenseMatrix DeflatedOp::apply_block(const DenseMatrix& x) const {
    const DenseMatrix& v = locked_.matrix;
    DenseMatrix p = x - v * (v.transpose() * x);
    DenseMatrix y = base_->apply_block(p);
    y -= v * (v.transpose() * y);
    return y;
}

OpPtr build_deflated(OpPtr base, OrthonormalBasis locked) {
    return std::make_shared<DeflatedOp>(std::move(base), std::move(locked));
}

Vector DilationOp::apply(const Vector& x) const {
    check_input(x);
    const Index m = rect_->out_dim();
    const Index n = rect_->in_dim();
    Vector y(m + n);
    y.head(m) = rect_->apply(x.tail(n));
    y.tail(n) = rect_->apply_transpose(x.head(m));
    return y;
}

DenseMatrix DilationOp::apply_block(const DenseMatrix& x) const {
    const Index m = rect_->out_dim();
    const Index n = rect_->in_dim();
    DenseMatrix y(m + n, x.cols());
    y.topRows(m) = rect_->apply_block(x.bottomRows(n));
    y.bottomRows(n) = rect_->apply_transpose_block(x.topRows(m));
    return y;
}

OpPtr build_dilation(OpPtr rect) { return std::make_shared<DilationOp>(std::move(rect)); }

OpPtr build_gram(OpPtr rect) { return std::make_shared<GramOp>(std::move(rect)); }

HankelTrajectoryOp::HankelTrajectoryOp(std::shared_ptr<const Vector> series, Index window)
    : series_(std::move(series)), window_(window) {
    const Index n = static_cast<Index>(series_->size());
    if (window_ < 2 || window_ > n) throw BadWindow("window must satisfy 2 <= W <= N");
    scale_ = 1.0 / std::sqrt(static_cast<double>(n));
}

Vector HankelTrajectoryOp::apply(const Vector& x) const {
    check_input(x);
    const Index k = in_dim();
    const Vector& s = *series_;
    Vector y = Vector::Zero(window_);
    for (Index i = 0; i < window_; ++i) {
        double acc = 0.0;
        for (Index j = 0; j < k; ++j) acc += s(i + j) * x(j);
        y(i) = acc * scale_;
    }
    return y;
}

Vector HankelTrajectoryOp::apply_transpose(const Vector& y) const {
    check_transpose_input(y);
    const Index k = in_dim();
    const Vector& s = *series_;
    Vector x = Vector::Zero(k);
    for (Index j = 0; j < k; ++j) {
        double acc = 0.0;
        for (Index i = 0; i < window_; ++i) acc += s(i + j) * y(i);
        x(j) = acc * scale_;
    }
    return x;
}

DenseMatrix HankelTrajectoryOp::to_dense() const {
    const Index k = in_dim();
    DenseMatrix m(window_, k);
    for (Index i = 0; i < window_; ++i)
        for (Index j = 0; j < k; ++j) m(i, j) = (*series_)(i + j) * scale_;
    return m;
}

OpPtr perturbation_from_graph_update(OpPtr before, OpPtr after) {
    return CombinedOp::difference(std::move(after), std::move(before));
}

} // namespace spectrack
