#pragma once

#include <memory>
#include <utility>

#include "spectrack/errors.hpp"
#include "spectrack/types.hpp"

namespace spectrack {

/// Matrix-free linear operator. Solvers and the tracker only ever touch
/// matrices through this interface, so sparse, structured and composed
/// operators all share one code path.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;

    virtual Index out_dim() const = 0;
    virtual Index in_dim() const = 0;
    virtual bool is_symmetric() const = 0;

    virtual Vector apply(const Vector& x) const = 0;

    /// Transpose action; defaults to apply() for symmetric operators.
    virtual Vector apply_transpose(const Vector& y) const {
        if (is_symmetric()) return apply(y);
        throw DimensionMismatch("apply_transpose not available for this operator");
    }

    virtual DenseMatrix apply_block(const DenseMatrix& x) const {
        DenseMatrix out(out_dim(), x.cols());
        for (Index j = 0; j < x.cols(); ++j) out.col(j) = apply(x.col(j));
        return out;
    }

    virtual DenseMatrix apply_transpose_block(const DenseMatrix& y) const {
        DenseMatrix out(in_dim(), y.cols());
        for (Index j = 0; j < y.cols(); ++j) out.col(j) = apply_transpose(y.col(j));
        return out;
    }

protected:
    void check_input(const Vector& x) const {
        if (x.size() != in_dim()) throw DimensionMismatch("operator input has wrong length");
    }
    void check_transpose_input(const Vector& y) const {
        if (y.size() != out_dim()) throw DimensionMismatch("operator transpose input has wrong length");
    }
};

using OpPtr = std::shared_ptr<const LinearOperator>;

/// Dense matrix wrapper, mainly for tests, oracles and small experiments.
class DenseOp final : public LinearOperator {
public:
    explicit DenseOp(DenseMatrix m, bool symmetric = false)
        : m_(std::move(m)), symmetric_(symmetric) {}

    static OpPtr make(DenseMatrix m, bool symmetric = false) {
        return std::make_shared<DenseOp>(std::move(m), symmetric);
    }

    Index out_dim() const override { return m_.rows(); }
    Index in_dim() const override { return m_.cols(); }
    bool is_symmetric() const override { return symmetric_; }

    Vector apply(const Vector& x) const override {
        check_input(x);
        return m_ * x;
    }
    Vector apply_transpose(const Vector& y) const override {
        check_transpose_input(y);
        return m_.transpose() * y;
    }
    DenseMatrix apply_block(const DenseMatrix& x) const override { return m_ * x; }
    DenseMatrix apply_transpose_block(const DenseMatrix& y) const override {
        return m_.transpose() * y;
    }

    const DenseMatrix& matrix() const { return m_; }

private:
    DenseMatrix m_;
    bool symmetric_;
};

/// base + shift * I (square operators only).
class ShiftedOp final : public LinearOperator {
public:
    ShiftedOp(OpPtr base, double shift) : base_(std::move(base)), shift_(shift) {
        if (base_->out_dim() != base_->in_dim())
            throw DimensionMismatch("shift requires a square operator");
    }

    static OpPtr make(OpPtr base, double shift) {
        return std::make_shared<ShiftedOp>(std::move(base), shift);
    }

    Index out_dim() const override { return base_->out_dim(); }
    Index in_dim() const override { return base_->in_dim(); }
    bool is_symmetric() const override { return base_->is_symmetric(); }

    Vector apply(const Vector& x) const override { return base_->apply(x) + shift_ * x; }
    DenseMatrix apply_block(const DenseMatrix& x) const override {
        return base_->apply_block(x) + shift_ * x;
    }

    double shift() const { return shift_; }
    const OpPtr& base() const { return base_; }

private:
    OpPtr base_;
    double shift_;
};

/// a + b or a - b over matching shapes.
class CombinedOp final : public LinearOperator {
public:
    CombinedOp(OpPtr a, OpPtr b, double b_coeff) : a_(std::move(a)), b_(std::move(b)), b_coeff_(b_coeff) {
        if (a_->out_dim() != b_->out_dim() || a_->in_dim() != b_->in_dim())
            throw DimensionMismatch("operator shapes differ");
    }

    static OpPtr sum(OpPtr a, OpPtr b) { return std::make_shared<CombinedOp>(std::move(a), std::move(b), 1.0); }
    static OpPtr difference(OpPtr a, OpPtr b) { return std::make_shared<CombinedOp>(std::move(a), std::move(b), -1.0); }

    Index out_dim() const override { return a_->out_dim(); }
    Index in_dim() const override { return a_->in_dim(); }
    bool is_symmetric() const override { return a_->is_symmetric() && b_->is_symmetric(); }

    Vector apply(const Vector& x) const override { return a_->apply(x) + b_coeff_ * b_->apply(x); }
    Vector apply_transpose(const Vector& y) const override {
        return a_->apply_transpose(y) + b_coeff_ * b_->apply_transpose(y);
    }
    DenseMatrix apply_block(const DenseMatrix& x) const override {
        return a_->apply_block(x) + b_coeff_ * b_->apply_block(x);
    }
    DenseMatrix apply_transpose_block(const DenseMatrix& y) const override {
        return a_->apply_transpose_block(y) + b_coeff_ * b_->apply_transpose_block(y);
    }

private:
    OpPtr a_;
    OpPtr b_;
    double b_coeff_;
};

/// Transpose view of a rectangular operator.
class TransposedOp final : public LinearOperator {
public:
    explicit TransposedOp(OpPtr base) : base_(std::move(base)) {}
    static OpPtr make(OpPtr base) { return std::make_shared<TransposedOp>(std::move(base)); }

    Index out_dim() const override { return base_->in_dim(); }
    Index in_dim() const override { return base_->out_dim(); }
    bool is_symmetric() const override { return base_->is_symmetric(); }

    Vector apply(const Vector& x) const override { return base_->apply_transpose(x); }
    Vector apply_transpose(const Vector& y) const override { return base_->apply(y); }
    DenseMatrix apply_block(const DenseMatrix& x) const override { return base_->apply_transpose_block(x); }
    DenseMatrix apply_transpose_block(const DenseMatrix& y) const override { return base_->apply_block(y); }

private:
    OpPtr base_;
};

class ZeroOp final : public LinearOperator {
public:
    ZeroOp(Index rows, Index cols) : rows_(rows), cols_(cols) {}
    static OpPtr make(Index rows, Index cols) { return std::make_shared<ZeroOp>(rows, cols); }

    Index out_dim() const override { return rows_; }
    Index in_dim() const override { return cols_; }
    bool is_symmetric() const override { return rows_ == cols_; }

    Vector apply(const Vector& x) const override {
        check_input(x);
        return Vector::Zero(rows_);
    }
    Vector apply_transpose(const Vector& y) const override {
        check_transpose_input(y);
        return Vector::Zero(cols_);
    }

private:
    Index rows_, cols_;
};

/// Wrapper that counts column applications (one per matrix-vector product).
class CountingOp final : public LinearOperator {
public:
    CountingOp(OpPtr base, std::shared_ptr<long> counter)
        : base_(std::move(base)), counter_(std::move(counter)) {}

    Index out_dim() const override { return base_->out_dim(); }
    Index in_dim() const override { return base_->in_dim(); }
    bool is_symmetric() const override { return base_->is_symmetric(); }

    Vector apply(const Vector& x) const override {
        ++*counter_;
        return base_->apply(x);
    }
    Vector apply_transpose(const Vector& y) const override {
        ++*counter_;
        return base_->apply_transpose(y);
    }
    DenseMatrix apply_block(const DenseMatrix& x) const override {
        *counter_ += x.cols();
        return base_->apply_block(x);
    }
    DenseMatrix apply_transpose_block(const DenseMatrix& y) const override {
        *counter_ += y.cols();
        return base_->apply_transpose_block(y);
    }

private:
    OpPtr base_;
    std::shared_ptr<long> counter_;
};

} // namespace spectrack
