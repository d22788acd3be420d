// Copyright (C) 2026 The cohere authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

// Ground truth for the coherence checks and marginal solvers. Assessments
// derived from a joint distribution (or from a layered family of joints,
// when some events have probability zero) are coherent by construction.

#include "cohere/coherence.hpp"
#include "cohere/error.hpp"
#include "cohere/marginals.hpp"
#include "cohere/matrix.hpp"
#include "cohere/scalar.hpp"
#include "cohere/support.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace cohere {

using Rng = std::mt19937_64;

namespace detail {

// Uniform integer in [lo, hi]. Uses the raw engine output only, so a seed
// gives the same stream with every standard library.
inline std::uint64_t draw_int(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
    return lo + rng() % (hi - lo + 1);
}

// Uniform double in (0, 1].
inline double draw_unit(Rng& rng) {
    return 1.0 - static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool draw_bool(Rng& rng, double p) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p;
}

template <ProbabilityScalar T>
T draw_weight(Rng& rng) {
    if constexpr (ScalarTraits<T>::exact) {
        return T(static_cast<long>(draw_int(rng, 1, 20)));
    } else {
        return draw_unit(rng);
    }
}

}  // namespace detail

/// Joint distribution of (X, Y): nonnegative, total mass 1, no empty row or column.
template <class T>
class Joint {
public:
    Joint(detail::StochasticKey, Matrix<T> m) : m_(std::move(m)) {}

    std::size_t rows() const noexcept { return m_.rows(); }
    std::size_t cols() const noexcept { return m_.cols(); }
    const T& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
    const Matrix<T>& matrix() const noexcept { return m_; }

private:
    Matrix<T> m_;
};

template <ProbabilityScalar T>
Joint<T> make_joint(Matrix<T> m, const Tolerance& tol = {}) {
    if (m.rows() == 0 || m.cols() == 0) throw Error(ErrorCode::InvalidJoint, "joint has no entries");
    T total(0);
    std::vector<T> row_sum(m.rows(), T(0)), col_sum(m.cols(), T(0));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (m(i, j) < 0)
                throw Error(ErrorCode::InvalidJoint,
                            "negative mass at (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")",
                            {i + 1, j + 1});
            total += m(i, j);
            row_sum[i] += m(i, j);
            col_sum[j] += m(i, j);
        }
    if (!ScalarTraits<T>::row_sum_ok(total, tol))
        throw Error(ErrorCode::InvalidJoint, "total mass is " + to_string(total));
    for (std::size_t i = 0; i < m.rows(); ++i)
        if (!is_positive(row_sum[i], tol))
            throw Error(ErrorCode::InvalidJoint, "row " + std::to_string(i + 1) + " carries no mass", {i + 1});
    for (std::size_t j = 0; j < m.cols(); ++j)
        if (!is_positive(col_sum[j], tol))
            throw Error(ErrorCode::InvalidJoint, "column " + std::to_string(j + 1) + " carries no mass", {j + 1});
    return Joint<T>(detail::StochasticKey{}, std::move(m));
}

inline void require_mask_covers(const SupportMask& mask, std::size_t l, std::size_t m) {
    if (mask.rows() != l || mask.cols() != m)
        throw Error(ErrorCode::BadMask, "mask is " + std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()) +
                                            ", expected " + std::to_string(l) + "x" + std::to_string(m));
    for (std::size_t i = 0; i < l; ++i) {
        bool any = false;
        for (std::size_t j = 0; j < m && !any; ++j) any = mask(i, j);
        if (!any) throw Error(ErrorCode::BadMask, "mask row " + std::to_string(i + 1) + " is empty", {i + 1});
    }
    for (std::size_t j = 0; j < m; ++j) {
        bool any = false;
        for (std::size_t i = 0; i < l && !any; ++i) any = mask(i, j);
        if (!any) throw Error(ErrorCode::BadMask, "mask column " + std::to_string(j + 1) + " is empty", {j + 1});
    }
}

/// Random joint, positive exactly on `mask` (everywhere without one).
/// Rational entries are small-denominator fractions: integer weights in
/// [1, 20] divided by their total.
template <ProbabilityScalar T>
Joint<T> random_joint(std::size_t l, std::size_t m, Rng& rng, const std::optional<SupportMask>& mask = std::nullopt) {
    if (l == 0 || m == 0) throw Error(ErrorCode::BadMask, "joint needs at least one row and one column");
    if (mask) require_mask_covers(*mask, l, m);
    Matrix<T> w(l, m);
    T total(0);
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (!mask || (*mask)(i, j)) {
                w(i, j) = detail::draw_weight<T>(rng);
                total += w(i, j);
            }
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = 0; j < m; ++j) w(i, j) /= total;
    return make_joint(std::move(w), Tolerance{1e-9, 0.0, 1e-9});
}

template <ProbabilityScalar T>
Joint<T> random_joint(std::size_t l, std::size_t m, std::uint64_t seed,
                      const std::optional<SupportMask>& mask = std::nullopt) {
    Rng rng(seed);
    return random_joint<T>(l, m, rng, mask);
}

/// p_ij = J_ij / rowsum_i,  q_ji = J_ij / colsum_j.
template <ProbabilityScalar T>
Assessment<T> derive_assessment(const Joint<T>& joint, const Tolerance& tol = {}) {
    const std::size_t l = joint.rows(), m = joint.cols();
    std::vector<T> rs(l, T(0)), cs(m, T(0));
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            rs[i] += joint(i, j);
            cs[j] += joint(i, j);
        }
    Matrix<T> p(l, m), q(m, l);
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            p(i, j) = joint(i, j) / rs[i];
            q(j, i) = joint(i, j) / cs[j];
        }
    return make_assessment(make_stochastic(std::move(p), tol, "P"), make_stochastic(std::move(q), tol, "Q"));
}

/// Row sums (distribution of X) and column sums (distribution of Y).
template <ProbabilityScalar T>
Marginals<T> joint_marginals(const Joint<T>& joint) {
    Marginals<T> out{std::vector<T>(joint.rows(), T(0)), std::vector<T>(joint.cols(), T(0))};
    for (std::size_t i = 0; i < joint.rows(); ++i)
        for (std::size_t j = 0; j < joint.cols(); ++j) {
            out.f[i] += joint(i, j);
            out.g[j] += joint(i, j);
        }
    return out;
}

struct RoundtripResult {
    bool pass = false;
    std::string detail;
};

/// Derives (P, Q) from `joint`, requires a coherent verdict, and requires the
/// joint's marginals to be among the reconstructed solutions.
template <ProbabilityScalar T>
RoundtripResult roundtrip_check(const Joint<T>& joint, const SolveConfig& cfg = {}) {
    const auto& tol = cfg.tolerance;
    const auto a = derive_assessment(joint, tol);
    const auto rep = check_coherence(a, cfg.check());
    if (!rep.coherent())
        return {false, "verdict " + std::string(verdict_name(rep.verdict)) + " via " +
                           std::string(method_name(rep.method)) + " for a joint-derived assessment"};
    MarginalSolution<T> sol;
    try {
        sol = solve_marginals(a, cfg);
    } catch (const Error& e) {
        return {false, e.what()};
    }
    const auto truth = joint_marginals(joint);

    std::vector<T> weights;
    for (const auto& blk : sol.blocks) {
        T wf(0), wg(0);
        for (std::size_t r : blk.rows) wf += truth.f[r];
        for (std::size_t c : blk.cols) wg += truth.g[c];
        if (!nearly_equal(wf, wg, tol))
            return {false, "block mass differs between rows (" + to_string(wf) + ") and columns (" + to_string(wg) + ")"};
        weights.push_back(wf);
    }
    const auto got = sol.unique() ? Marginals<T>{sol.f, sol.g} : materialize(sol, std::span<const T>(weights), tol);
    for (std::size_t i = 0; i < truth.f.size(); ++i)
        if (!nearly_equal(got.f[i], truth.f[i], tol))
            return {false, "f[" + std::to_string(i + 1) + "] = " + to_string(got.f[i]) + ", joint gives " +
                               to_string(truth.f[i])};
    for (std::size_t j = 0; j < truth.g.size(); ++j)
        if (!nearly_equal(got.g[j], truth.g[j], tol))
            return {false, "g[" + std::to_string(j + 1) + "] = " + to_string(got.g[j]) + ", joint gives " +
                               to_string(truth.g[j])};
    return {true, {}};
}

/// Adds `delta` to p_ij and renormalizes row i.
template <ProbabilityScalar T>
Assessment<T> perturb_p(const Assessment<T>& a, std::size_t i, std::size_t j, const T& delta, const Tolerance& tol = {}) {
    Matrix<T> p = a.P().matrix();
    p(i, j) += delta;
    const T scale = T(1) + delta;
    for (std::size_t c = 0; c < p.cols(); ++c) p(i, c) /= scale;
    return make_assessment(make_stochastic(std::move(p), tol, "P"), a.Q());
}

/// Random spanning tree of the complete bipartite graph K_{l,m} as a mask.
inline SupportMask random_tree_mask(std::size_t l, std::size_t m, Rng& rng) {
    SupportMask mask(l, m);
    std::vector<std::size_t> rows_in{0}, cols_in{0};
    mask.set(0, 0);
    // Remaining nodes in random order; each attaches to a node of the other side.
    std::vector<std::size_t> pending;
    for (std::size_t i = 1; i < l; ++i) pending.push_back(i);
    for (std::size_t j = 1; j < m; ++j) pending.push_back(l + j);
    for (std::size_t k = pending.size(); k > 1; --k) std::swap(pending[k - 1], pending[detail::draw_int(rng, 0, k - 1)]);
    for (std::size_t v : pending) {
        if (v < l) {
            mask.set(v, cols_in[detail::draw_int(rng, 0, cols_in.size() - 1)]);
            rows_in.push_back(v);
        } else {
            mask.set(rows_in[detail::draw_int(rng, 0, rows_in.size() - 1)], v - l);
            cols_in.push_back(v - l);
        }
    }
    return mask;
}

/// Monotone lattice path from (1, 1) to (l, m): a tree whose bipartite graph
/// is a simple path, which maximizes the T/Z exponent.
inline SupportMask staircase_mask(std::size_t l, std::size_t m, Rng& rng) {
    SupportMask mask(l, m);
    std::size_t i = 0, j = 0;
    mask.set(0, 0);
    while (i + 1 < l || j + 1 < m) {
        const bool down = j + 1 == m || (i + 1 < l && detail::draw_bool(rng, 0.5));
        if (down)
            ++i;
        else
            ++j;
        mask.set(i, j);
    }
    return mask;
}

/// Random tree plus each remaining cell with probability `extra`.
inline SupportMask random_connected_mask(std::size_t l, std::size_t m, Rng& rng, double extra) {
    SupportMask mask = random_tree_mask(l, m, rng);
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (!mask(i, j) && detail::draw_bool(rng, extra)) mask.set(i, j);
    return mask;
}

/// Block-diagonal mask with the given (rows, cols) block shapes, each block
/// a random connected pattern.
inline SupportMask block_diagonal_mask(const std::vector<std::pair<std::size_t, std::size_t>>& shapes, Rng& rng,
                                       double extra = 0.5) {
    std::size_t l = 0, m = 0;
    for (const auto& [r, c] : shapes) {
        l += r;
        m += c;
    }
    SupportMask mask(l, m);
    std::size_t r0 = 0, c0 = 0;
    for (const auto& [r, c] : shapes) {
        const SupportMask inner = random_connected_mask(r, c, rng, extra);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j)
                if (inner(i, j)) mask.set(r0 + i, c0 + j);
        r0 += r;
        c0 += c;
    }
    return mask;
}

/// Coherent assessment with zero-probability conditioning events. A sequence
/// of measures on disjoint sets of cells (A_i, B_j) is drawn; each row and
/// column is conditioned on the first measure that gives it mass. This is a
/// full conditional probability, so the result is coherent, and unlike a
/// single joint it usually breaks the matching-support property.
template <ProbabilityScalar T>
Assessment<T> random_layered_assessment(std::size_t l, std::size_t m, Rng& rng, double density = 0.4) {
    SupportMask used(l, m);
    std::vector<char> row_done(l, 0), col_done(m, 0);
    std::size_t remaining = l + m;
    Matrix<T> p(l, m), q(m, l);
    while (remaining > 0) {
        // Layer support: random unused cells plus one that reaches an open row or column.
        Matrix<T> w(l, m);
        std::vector<std::pair<std::size_t, std::size_t>> open_cells;
        for (std::size_t i = 0; i < l; ++i)
            for (std::size_t j = 0; j < m; ++j)
                if (!used(i, j) && (!row_done[i] || !col_done[j])) open_cells.emplace_back(i, j);
        const auto anchor = open_cells[detail::draw_int(rng, 0, open_cells.size() - 1)];
        for (std::size_t i = 0; i < l; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                if (used(i, j)) continue;
                if ((i == anchor.first && j == anchor.second) || detail::draw_bool(rng, density)) {
                    w(i, j) = detail::draw_weight<T>(rng);
                    used.set(i, j);
                }
            }
        for (std::size_t i = 0; i < l; ++i) {
            if (row_done[i]) continue;
            T s(0);
            for (std::size_t j = 0; j < m; ++j) s += w(i, j);
            if (s == 0) continue;
            for (std::size_t j = 0; j < m; ++j) p(i, j) = w(i, j) / s;
            row_done[i] = 1;
            --remaining;
        }
        for (std::size_t j = 0; j < m; ++j) {
            if (col_done[j]) continue;
            T s(0);
            for (std::size_t i = 0; i < l; ++i) s += w(i, j);
            if (s == 0) continue;
            for (std::size_t i = 0; i < l; ++i) q(j, i) = w(i, j) / s;
            col_done[j] = 1;
            --remaining;
        }
    }
    return make_assessment(make_stochastic(std::move(p), {}, "P"), make_stochastic(std::move(q), {}, "Q"));
}

/// Independent random stochastic P and Q; each entry is zero with
/// probability `zero_probability` (every row keeps one positive entry).
template <ProbabilityScalar T>
Assessment<T> random_stochastic_pair(std::size_t l, std::size_t m, Rng& rng, double zero_probability = 0.3) {
    auto draw = [&](std::size_t rows, std::size_t cols) {
        Matrix<T> x(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t keep = detail::draw_int(rng, 0, cols - 1);
            T s(0);
            for (std::size_t c = 0; c < cols; ++c)
                if (c == keep || !detail::draw_bool(rng, zero_probability)) {
                    x(r, c) = detail::draw_weight<T>(rng);
                    s += x(r, c);
                }
            for (std::size_t c = 0; c < cols; ++c) x(r, c) /= s;
        }
        return x;
    };
    auto p = draw(l, m);
    auto q = draw(m, l);
    return make_assessment(make_stochastic(std::move(p), {}, "P"), make_stochastic(std::move(q), {}, "Q"));
}

}  // namespace cohere
