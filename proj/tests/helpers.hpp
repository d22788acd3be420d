// Copyright (C) 2026 The cohere authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "cohere/cohere.hpp"
#include "cohere/io.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace cohere::testing {

using Grid = std::vector<std::vector<std::string>>;

inline Matrix<Rational> rational_matrix(const Grid& g) {
    Matrix<Rational> m(g.size(), g.front().size());
    for (std::size_t r = 0; r < g.size(); ++r)
        for (std::size_t c = 0; c < g[r].size(); ++c) m(r, c) = *parse_rational(g[r][c]);
    return m;
}

inline Matrix<double> double_matrix(const Grid& g) {
    Matrix<double> m(g.size(), g.front().size());
    for (std::size_t r = 0; r < g.size(); ++r)
        for (std::size_t c = 0; c < g[r].size(); ++c) m(r, c) = parse_rational(g[r][c])->get_d();
    return m;
}

template <class T = Rational>
Assessment<T> assessment(const Grid& p, const Grid& q) {
    if constexpr (std::is_same_v<T, Rational>)
        return make_assessment(make_stochastic(rational_matrix(p), {}, "P"), make_stochastic(rational_matrix(q), {}, "Q"));
    else
        return make_assessment(make_stochastic(double_matrix(p), {}, "P"), make_stochastic(double_matrix(q), {}, "Q"));
}

template <class T = Rational>
Joint<T> joint(const Grid& j) {
    if constexpr (std::is_same_v<T, Rational>)
        return make_joint(rational_matrix(j));
    else
        return make_joint(double_matrix(j));
}

inline Rational q(const char* s) { return *parse_rational(s); }

inline std::vector<Rational> qv(std::initializer_list<const char*> xs) {
    std::vector<Rational> out;
    for (const char* x : xs) out.push_back(q(x));
    return out;
}

template <class T = Rational>
Assessment<T> golden() {
    return assessment<T>({{"1", "0", "0"}, {"1/3", "1/3", "1/3"}, {"1/3", "1/3", "1/3"}},
                         {{"1", "0", "0"}, {"1/4", "1/2", "1/4"}, {"1/4", "1/4", "1/2"}});
}

/// Places `a` and `b` on the diagonal: rows/cols of `b` follow those of `a`.
template <class T>
Assessment<T> block_diagonal(const Assessment<T>& a, const Assessment<T>& b) {
    const std::size_t l = a.rows() + b.rows(), m = a.cols() + b.cols();
    Matrix<T> p(l, m), qm(m, l);
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            p(i, j) = T(0);
            qm(j, i) = T(0);
        }
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            p(i, j) = a.p(i, j);
            qm(j, i) = a.q(j, i);
        }
    for (std::size_t i = 0; i < b.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            p(a.rows() + i, a.cols() + j) = b.p(i, j);
            qm(a.cols() + j, a.rows() + i) = b.q(j, i);
        }
    return make_assessment(make_stochastic(std::move(p)), make_stochastic(std::move(qm)));
}

/// Relabels rows by `rp` and columns by `cp`: new row k is old row rp[k].
template <class T>
Assessment<T> relabel(const Assessment<T>& a, const std::vector<std::size_t>& rp, const std::vector<std::size_t>& cp) {
    Matrix<T> p(a.rows(), a.cols()), qm(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            p(i, j) = a.p(rp[i], cp[j]);
            qm(j, i) = a.q(cp[j], rp[i]);
        }
    return make_assessment(make_stochastic(std::move(p)), make_stochastic(std::move(qm)));
}

// ---------------------------------------------------------------------------
// Independent oracles. None of these call into the library's cycle
// enumeration, solvers or graph code.

/// Direct enumeration of the product condition over every ordered pair of
/// sequences of distinct rows and distinct columns of equal length n >= 2.
/// Returns true when some sequence pair violates it.
template <class T>
class CycleOracle {
public:
    explicit CycleOracle(const Assessment<T>& a, Tolerance tol = {}) : a_(a), tol_(tol) {}

    bool violated() {
        const std::size_t top = std::min(a_.rows(), a_.cols());
        for (n_ = 2; n_ <= top; ++n_) {
            is_.assign(n_, 0);
            js_.assign(n_, 0);
            row_used_.assign(a_.rows(), false);
            col_used_.assign(a_.cols(), false);
            if (pick_row(0)) return true;
        }
        return false;
    }

private:
    bool pick_row(std::size_t k) {
        if (k == n_) return pick_col(0);
        for (std::size_t i = 0; i < a_.rows(); ++i) {
            if (row_used_[i]) continue;
            row_used_[i] = true;
            is_[k] = i;
            const bool hit = pick_row(k + 1);
            row_used_[i] = false;
            if (hit) return true;
        }
        return false;
    }

    bool pick_col(std::size_t k) {
        if (k == n_) return mismatch();
        for (std::size_t j = 0; j < a_.cols(); ++j) {
            if (col_used_[j]) continue;
            col_used_[j] = true;
            js_[k] = j;
            const bool hit = pick_col(k + 1);
            col_used_[j] = false;
            if (hit) return true;
        }
        return false;
    }

    bool mismatch() const {
        T lhs(1), rhs(1);
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t next = is_[(k + 1) % n_];
            lhs *= a_.p(is_[k], js_[k]) * a_.q(js_[k], next);
            rhs *= a_.p(next, js_[k]) * a_.q(js_[k], is_[k]);
        }
        return !nearly_equal(lhs, rhs, tol_);
    }

    const Assessment<T>& a_;
    Tolerance tol_;
    std::size_t n_ = 0;
    std::vector<std::size_t> is_, js_;
    std::vector<bool> row_used_, col_used_;
};

template <class T>
bool oracle_coherent(const Assessment<T>& a, Tolerance tol = {}) {
    return !CycleOracle<T>(a, tol).violated();
}

/// Literal reading of the connectedness definition: a matrix is unconnected
/// when some row permutation and column permutation bring it to
/// [[A, 0], [0, B]] with A being r0 x c0 and B (l-r0) x (m-c0), all four
/// sizes at least 1. Every permutation pair and split point is tried.
inline bool oracle_connected(const SupportMask& mask) {
    const std::size_t l = mask.rows(), m = mask.cols();
    std::vector<std::size_t> rp(l);
    std::iota(rp.begin(), rp.end(), std::size_t{0});
    do {
        std::vector<std::size_t> cp(m);
        std::iota(cp.begin(), cp.end(), std::size_t{0});
        do {
            for (std::size_t r0 = 1; r0 < l; ++r0)
                for (std::size_t c0 = 1; c0 < m; ++c0) {
                    bool zero_off_diagonal = true;
                    for (std::size_t r = 0; r < l && zero_off_diagonal; ++r)
                        for (std::size_t c = 0; c < m && zero_off_diagonal; ++c)
                            if ((r < r0) != (c < c0) && mask(rp[r], cp[c])) zero_off_diagonal = false;
                    if (zero_off_diagonal) return false;
                }
        } while (std::next_permutation(cp.begin(), cp.end()));
    } while (std::next_permutation(rp.begin(), rp.end()));
    return true;
}

/// Residual of  p_ij f_i = q_ji g_j  and the two normalizations, computed
/// from scratch.
template <class T>
bool oracle_solves(const Assessment<T>& a, const std::vector<T>& f, const std::vector<T>& g, Tolerance tol = {}) {
    if (f.size() != a.rows() || g.size() != a.cols()) return false;
    T sf(0), sg(0);
    for (const auto& x : f) {
        if (x < 0) return false;
        sf += x;
    }
    for (const auto& x : g) {
        if (x < 0) return false;
        sg += x;
    }
    if (!nearly_equal(sf, T(1), tol) || !nearly_equal(sg, T(1), tol)) return false;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (!nearly_equal(T(a.p(i, j) * f[i]), T(a.q(j, i) * g[j]), tol)) return false;
    return true;
}

/// Row and column sums of a joint matrix.
template <class T>
std::pair<std::vector<T>, std::vector<T>> oracle_sums(const Joint<T>& j) {
    std::vector<T> f(j.rows(), T(0)), g(j.cols(), T(0));
    for (std::size_t r = 0; r < j.rows(); ++r)
        for (std::size_t c = 0; c < j.cols(); ++c) {
            f[r] += j(r, c);
            g[c] += j(r, c);
        }
    return {f, g};
}

template <class T>
double max_abs_diff(const std::vector<T>& a, const std::vector<T>& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(to_double(a[k]) - to_double(b[k])));
    return worst;
}

inline std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    for (std::size_t k = n; k > 1; --k) std::swap(p[k - 1], p[rng() % k]);
    return p;
}

}  // namespace cohere::testing
