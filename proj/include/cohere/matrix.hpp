// Copyright (C) 2026 The cohere authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "cohere/error.hpp"
#include "cohere/scalar.hpp"

#include <cassert>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cohere {

/// Dense row-major matrix. Only what the coherence checks need: element
/// access, transpose and products.
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, const T& fill = T(0))
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    T& operator()(std::size_t r, std::size_t c) {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }
    const T& operator()(std::size_t r, std::size_t c) const {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }

    std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        assert(a.cols_ == b.rows_);
        Matrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T& aik = a(i, k);
                if (aik == 0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    static Matrix from_rows(const std::vector<std::vector<T>>& grid) {
        const std::size_t rows = grid.size();
        const std::size_t cols = rows ? grid.front().size() : 0;
        Matrix m(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            if (grid[r].size() != cols)
                throw Error(ErrorCode::NotRectangular,
                            "row " + std::to_string(r + 1) + " has " + std::to_string(grid[r].size()) +
                                " entries, expected " + std::to_string(cols),
                            {r + 1});
            for (std::size_t c = 0; c < cols; ++c) m(r, c) = grid[r][c];
        }
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

namespace detail {
struct StochasticKey {
    explicit StochasticKey() = default;
};
}  // namespace detail

/// A validated row-stochastic matrix: nonnegative entries, rows summing to 1.
/// Only make_stochastic creates one.
template <ProbabilityScalar T>
class ProbMatrix {
public:
    ProbMatrix(detail::StochasticKey, Matrix<T> m) : m_(std::move(m)) {}

    std::size_t rows() const noexcept { return m_.rows(); }
    std::size_t cols() const noexcept { return m_.cols(); }
    const T& operator()(std::size_t r, std::size_t c) const { return m_(r, c); }
    const Matrix<T>& matrix() const noexcept { return m_; }

    friend bool operator==(const ProbMatrix& a, const ProbMatrix& b) { return a.m_ == b.m_; }

private:
    Matrix<T> m_;
};

/// Validates `m` as a stochastic matrix. `name` only decorates error messages.
template <ProbabilityScalar T>
ProbMatrix<T> make_stochastic(Matrix<T> m, const Tolerance& tol = {}, std::string_view name = "matrix") {
    const std::string label(name);
    if (m.rows() == 0 || m.cols() == 0) throw Error(ErrorCode::EmptyMatrix, label + " has no entries");
    for (std::size_t r = 0; r < m.rows(); ++r) {
        T sum(0);
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (m(r, c) < 0) {
                throw Error(ErrorCode::NegativeEntry,
                            label + " entry (" + std::to_string(r + 1) + ", " + std::to_string(c + 1) +
                                ") is negative: " + to_string(m(r, c)),
                            {r + 1, c + 1});
            }
            sum += m(r, c);
        }
        if (!ScalarTraits<T>::row_sum_ok(sum, tol)) {
            throw Error(ErrorCode::RowSumViolation,
                        label + " row " + std::to_string(r + 1) + " sums to " + to_string(sum) + ", expected 1",
                        {r + 1});
        }
    }
    return ProbMatrix<T>(detail::StochasticKey{}, std::move(m));
}

template <ProbabilityScalar T>
ProbMatrix<T> make_stochastic(const std::vector<std::vector<T>>& grid, const Tolerance& tol = {},
                              std::string_view name = "matrix") {
    if (grid.empty()) throw Error(ErrorCode::EmptyMatrix, std::string(name) + " has no rows");
    return make_stochastic(Matrix<T>::from_rows(grid), tol, name);
}

/// The pair (P, Q): p(i, j) = P(B_j | A_i) is l x m, q(j, i) = P(A_i | B_j) is m x l.
template <ProbabilityScalar T>
class Assessment {
public:
    Assessment(ProbMatrix<T> p, ProbMatrix<T> q) : p_(std::move(p)), q_(std::move(q)) {}

    std::size_t rows() const noexcept { return p_.rows(); }
    std::size_t cols() const noexcept { return p_.cols(); }

    const T& p(std::size_t i, std::size_t j) const { return p_(i, j); }
    const T& q(std::size_t j, std::size_t i) const { return q_(j, i); }

    const ProbMatrix<T>& P() const noexcept { return p_; }
    const ProbMatrix<T>& Q() const noexcept { return q_; }

    friend bool operator==(const Assessment& a, const Assessment& b) { return a.p_ == b.p_ && a.q_ == b.q_; }

private:
    ProbMatrix<T> p_;
    ProbMatrix<T> q_;
};

template <ProbabilityScalar T>
Assessment<T> make_assessment(ProbMatrix<T> p, ProbMatrix<T> q) {
    if (p.cols() != q.rows() || p.rows() != q.cols()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "P is " + std::to_string(p.rows()) + "x" + std::to_string(p.cols()) + " so Q must be " +
                        std::to_string(p.cols()) + "x" + std::to_string(p.rows()) + ", got " +
                        std::to_string(q.rows()) + "x" + std::to_string(q.cols()),
                    {p.rows(), p.cols(), q.rows(), q.cols()});
    }
    return Assessment<T>(std::move(p), std::move(q));
}

/// Restriction of `a` to the given (0-based) rows and columns. Rows of the
/// restriction are re-validated, so the index sets must be closed under the
/// support of P and Q.
template <ProbabilityScalar T>
Assessment<T> restrict_assessment(const Assessment<T>& a, std::span<const std::size_t> rows,
                                  std::span<const std::size_t> cols, const Tolerance& tol = {}) {
    Matrix<T> p(rows.size(), cols.size());
    Matrix<T> q(cols.size(), rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) {
            p(r, c) = a.p(rows[r], cols[c]);
            q(c, r) = a.q(cols[c], rows[r]);
        }
    return make_assessment(make_stochastic(std::move(p), tol, "P"), make_stochastic(std::move(q), tol, "Q"));
}

}  // namespace cohere
