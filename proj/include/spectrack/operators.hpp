#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "spectrack/linalg.hpp"
#include "spectrack/operator.hpp"

namespace spectrack {

/// Symmetric sparse matrix in CSR form. Both (i,j) and (j,i) are stored;
/// column indices are sorted within each row and explicit zeros are dropped.
class SparseSymmetric {
public:
    SparseSymmetric() = default;

    /// Unit-weight undirected edges (u, v), u != v, no duplicates.
    static SparseSymmetric from_edges(Index n, const std::vector<std::pair<Index, Index>>& edges);

    /// General symmetric triplets; (i, j, w) implies (j, i, w). Diagonal allowed.
    static SparseSymmetric from_triplets(Index n,
                                         const std::vector<std::tuple<Index, Index, double>>& triplets);

    Index size() const { return n_; }
    Index nnz() const { return static_cast<Index>(col_.size()); }

    Vector multiply(const Vector& x) const;
    Vector row_sums() const;
    bool has_edge(Index u, Index v) const;

    /// New matrix with the given unit edges added / removed. Inputs are assumed
    /// validated (additions absent, deletions present).
    SparseSymmetric with_edges_toggled(const std::vector<std::pair<Index, Index>>& additions,
                                       const std::vector<std::pair<Index, Index>>& deletions) const;

    DenseMatrix to_dense() const;

    /// All stored edges (u < v), for iteration at desk scale.
    std::vector<std::pair<Index, Index>> edge_list() const;

private:
    Index n_ = 0;
    std::vector<Index> row_ptr_;
    std::vector<Index> col_;
    std::vector<double> val_;
};

class SparseSymmetricOp final : public LinearOperator {
public:
    explicit SparseSymmetricOp(std::shared_ptr<const SparseSymmetric> m) : m_(std::move(m)) {}
    static OpPtr make(std::shared_ptr<const SparseSymmetric> m) {
        return std::make_shared<SparseSymmetricOp>(std::move(m));
    }

    Index out_dim() const override { return m_->size(); }
    Index in_dim() const override { return m_->size(); }
    bool is_symmetric() const override { return true; }
    Vector apply(const Vector& x) const override {
        check_input(x);
        return m_->multiply(x);
    }

private:
    std::shared_ptr<const SparseSymmetric> m_;
};

/// D_tau^{-1/2} (A + (tau/n) 1 1^T) D_tau^{-1/2} where D_tau are the
/// regularized degrees. The rank-one term is applied analytically, so a
/// matvec costs one sparse multiply plus O(n).
class NormalizedAdjacencyOp final : public LinearOperator {
public:
    NormalizedAdjacencyOp(std::shared_ptr<const SparseSymmetric> adjacency, Vector degrees, double tau);

    Index out_dim() const override { return n_; }
    Index in_dim() const override { return n_; }
    bool is_symmetric() const override { return true; }
    Vector apply(const Vector& x) const override;

    const Vector& degrees() const { return degrees_; }
    double tau() const { return tau_; }
    const SparseSymmetric& adjacency() const { return *adjacency_; }
    std::shared_ptr<const SparseSymmetric> adjacency_ptr() const { return adjacency_; }

    DenseMatrix to_dense() const;

private:
    std::shared_ptr<const SparseSymmetric> adjacency_;
    Vector degrees_;       // regularized: row sum + tau
    Vector inv_sqrt_deg_;
    double tau_ = 0.0;
    Index n_ = 0;
};

enum class DegreeMode { Regularized, Raw };

/// Builds the regularized normalized adjacency operator. By default degrees
/// are the regularized ones, deg_i = sum_j A_ij + tau, which keeps the
/// spectrum inside [-1, 1]; DegreeMode::Raw normalizes by the plain row sums
/// instead. Throws IsolatedVertex when a scaling degree is zero.
std::shared_ptr<const NormalizedAdjacencyOp>
build_normalized_adjacency(std::shared_ptr<const SparseSymmetric> adjacency, double tau,
                           DegreeMode mode = DegreeMode::Regularized);

/// (I - VV^T) A (I - VV^T) for a symmetric base and locked orthonormal V.
class DeflatedOp final : public LinearOperator {
public:
    DeflatedOp(OpPtr base, OrthonormalBasis locked);

    Index out_dim() const override { return base_->out_dim(); }
    Index in_dim() const override { return base_->in_dim(); }
    bool is_symmetric() const override { return true; }
    Vector apply(const Vector& x) const override;
    DenseMatrix apply_block(const DenseMatrix& x) const override;

private:
    OpPtr base_;
    OrthonormalBasis locked_;
};

OpPtr build_deflated(OpPtr base, OrthonormalBasis locked);

/// Symmetric dilation [[0, A], [A^T, 0]] of a rectangular operator; its
/// eigenvalues are the +/- singular values of A.
class DilationOp final : public LinearOperator {
public:
    explicit DilationOp(OpPtr rect) : rect_(std::move(rect)) {}

    Index out_dim() const override { return rect_->out_dim() + rect_->in_dim(); }
    Index in_dim() const override { return out_dim(); }
    bool is_symmetric() const override { return true; }
    Vector apply(const Vector& x) const override;
    DenseMatrix apply_block(const DenseMatrix& x) const override;

private:
    OpPtr rect_;
};

OpPtr build_dilation(OpPtr rect);

/// A^T A of a rectangular operator; eigenvalues are squared singular values.
class GramOp final : public LinearOperator {
public:
    explicit GramOp(OpPtr rect) : rect_(std::move(rect)) {}

    Index out_dim() const override { return rect_->in_dim(); }
    Index in_dim() const override { return rect_->in_dim(); }
    bool is_symmetric() const override { return true; }
    Vector apply(const Vector& x) const override { return rect_->apply_transpose(rect_->apply(x)); }

private:
    OpPtr rect_;
};

OpPtr build_gram(OpPtr rect);

/// W x (N-W+1) Hankel trajectory matrix of a series, scaled by 1/sqrt(N):
/// entry (i, j) = series[i + j] / sqrt(N) (zero-based). Antidiagonals are
/// constant. Matvecs are direct double loops, fine at desk scale.
class HankelTrajectoryOp final : public LinearOperator {
public:
    HankelTrajectoryOp(std::shared_ptr<const Vector> series, Index window);

    Index out_dim() const override { return window_; }
    Index in_dim() const override { return static_cast<Index>(series_->size()) - window_ + 1; }
    bool is_symmetric() const override { return false; }
    Vector apply(const Vector& x) const override;
    Vector apply_transpose(const Vector& y) const override;

    DenseMatrix to_dense() const;
    double scale() const { return scale_; }
    Index window() const { return window_; }

private:
    std::shared_ptr<const Vector> series_;
    Index window_ = 0;
    double scale_ = 1.0;
};

/// sign * z z^T; spectral norm is ||z||^2.
class RankOnePerturbationOp final : public LinearOperator {
public:
    RankOnePerturbationOp(double sign, Vector z) : sign_(sign), z_(std::move(z)) {}

    Index out_dim() const override { return z_.size(); }
    Index in_dim() const override { return z_.size(); }
    bool is_symmetric() const override { return true; }
    Vector apply(const Vector& x) const override {
        check_input(x);
        return (sign_ * z_.dot(x)) * z_;
    }

    double norm2() const { return z_.squaredNorm(); }
    double sign() const { return sign_; }
    const Vector& vector() const { return z_; }

private:
    double sign_;
    Vector z_;
};

/// Implicit difference after.apply(x) - before.apply(x); never materialized.
OpPtr perturbation_from_graph_update(OpPtr before, OpPtr after);

} // namespace spectrack
