#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include "mpocert/errors.hpp"
#include "mpocert/rational.hpp"

namespace mpocert {

/// Small dense row-major matrix. Used for exact (Rational) linear algebra
/// where Eigen's expression templates do not mix well with gmpxx; the float
/// side of the library uses Eigen directly.
template <typename T>
class Matrix {
public:
    using value_type = T;

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) throw PreconditionError("matrix data does not match its shape");
    }
    Matrix(std::initializer_list<std::initializer_list<T>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw PreconditionError("ragged matrix literal");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    T& operator()(std::size_t i, std::size_t j) {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }
    const T& operator()(std::size_t i, std::size_t j) const {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }

    const std::vector<T>& data() const noexcept { return data_; }
    std::vector<T>& data() noexcept { return data_; }

    bool is_zero() const {
        return std::all_of(data_.begin(), data_.end(), [](const T& x) { return mpocert::is_zero(x); });
    }

    /// Copies `block` into this matrix with its top-left corner at (r0, c0).
    void set_block(std::size_t r0, std::size_t c0, const Matrix& block) {
        if (r0 + block.rows() > rows_ || c0 + block.cols() > cols_) throw PreconditionError("block out of range");
        for (std::size_t i = 0; i < block.rows(); ++i)
            for (std::size_t j = 0; j < block.cols(); ++j) (*this)(r0 + i, c0 + j) = block(i, j);
    }

    Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
        if (r0 + nr > rows_ || c0 + nc > cols_) throw PreconditionError("block out of range");
        Matrix out(nr, nc);
        for (std::size_t i = 0; i < nr; ++i)
            for (std::size_t j = 0; j < nc; ++j) out(i, j) = (*this)(r0 + i, c0 + j);
        return out;
    }

    Matrix transpose() const {
        Matrix out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
        return out;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw PreconditionError("matrix product shape mismatch");
        Matrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T& aik = a(i, k);
                if (mpocert::is_zero(aik)) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }

    friend Matrix operator+(const Matrix& a, const Matrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw PreconditionError("matrix sum shape mismatch");
        Matrix out = a;
        for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += b.data_[i];
        return out;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// Row vector times matrix: (v^T M)^T.
template <typename T>
std::vector<T> row_times(const std::vector<T>& v, const Matrix<T>& m) {
    if (v.size() != m.rows()) throw PreconditionError("row vector length does not match matrix");
    std::vector<T> out(m.cols(), T(0));
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (is_zero(v[i])) continue;
        for (std::size_t j = 0; j < m.cols(); ++j) out[j] += v[i] * m(i, j);
    }
    return out;
}

template <typename T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
    if (a.size() != b.size()) throw PreconditionError("dot product length mismatch");
    T acc(0);
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

template <typename T>
Matrix<T> power(const Matrix<T>& m, std::size_t k) {
    if (!m.square()) throw PreconditionError("power of a non-square matrix");
    Matrix<T> out = Matrix<T>::identity(m.rows());
    for (std::size_t i = 0; i < k; ++i) out = out * m;
    return out;
}

/// Exact rank by fraction-based Gaussian elimination.
inline std::size_t exact_rank(Matrix<Rational> m) {
    std::size_t rank = 0;
    const std::size_t rows = m.rows(), cols = m.cols();
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t pivot = rank;
        while (pivot < rows && sgn(m(pivot, c)) == 0) ++pivot;
        if (pivot == rows) continue;
        if (pivot != rank)
            for (std::size_t j = 0; j < cols; ++j) std::swap(m(pivot, j), m(rank, j));
        for (std::size_t r = rank + 1; r < rows; ++r) {
            if (sgn(m(r, c)) == 0) continue;
            Rational factor = m(r, c) / m(rank, c);
            for (std::size_t j = c; j < cols; ++j) m(r, j) -= factor * m(rank, j);
        }
        ++rank;
    }
    return rank;
}

}  // namespace mpocert
