// Copyright (C) 2026 The cohere authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "cohere/coherence.hpp"
#include "cohere/error.hpp"
#include "cohere/matrix.hpp"
#include "cohere/scalar.hpp"
#include "cohere/support.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cohere {

enum class SolutionKind { unique, family, infeasible };

constexpr std::string_view kind_name(SolutionKind k) {
    switch (k) {
        case SolutionKind::unique: return "unique";
        case SolutionKind::family: return "family";
        case SolutionKind::infeasible: return "infeasible";
    }
    return "?";
}

/// Marginals of one block, each part normalized to sum 1 within the block.
/// f[k] belongs to row rows[k], g[k] to column cols[k].
template <class T>
struct MarginalBlock {
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;
    std::vector<T> f;
    std::vector<T> g;
};

/// Solutions of  p_ij f_i = q_ji g_j,  sum f = sum g = 1,  f, g >= 0.
///
/// Every convex combination of the blocks (weights on the simplex) is a
/// solution; rows and columns outside all blocks are zero in every solution.
/// `f` and `g` hold the solution materialized with `weights`.
template <class T>
struct MarginalSolution {
    SolutionKind kind = SolutionKind::infeasible;
    std::size_t num_rows = 0;
    std::size_t num_cols = 0;
    std::vector<MarginalBlock<T>> blocks;
    // Components whose equations admit only the zero solution; kept for auditing.
    std::vector<Block> zero_weight_blocks;
    std::vector<PairWitness> zero_weight_witnesses;
    std::vector<std::size_t> forced_zero_rows;
    std::vector<std::size_t> forced_zero_cols;
    std::size_t weight_freedom = 0;
    std::vector<T> weights;
    std::vector<T> f;
    std::vector<T> g;
    std::vector<std::string> warnings;
    std::string method;

    bool unique() const noexcept { return kind == SolutionKind::unique; }
};

struct SolveConfig {
    Tolerance tolerance;
    BruteForceLimits brute_force;
    bool allow_incoherent = false;

    CheckConfig check() const { return {tolerance, brute_force}; }
};

/// True when (f, g) is a normalized nonnegative solution of the marginal system.
template <ProbabilityScalar T>
bool satisfies_system3(const Assessment<T>& a, std::span<const T> f, std::span<const T> g, const Tolerance& tol = {}) {
    if (f.size() != a.rows() || g.size() != a.cols()) return false;
    T fs(0), gs(0);
    for (const T& x : f) {
        if (x < 0) return false;
        fs += x;
    }
    for (const T& x : g) {
        if (x < 0) return false;
        gs += x;
    }
    if (!nearly_equal(fs, T(1), tol) || !nearly_equal(gs, T(1), tol)) return false;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (!nearly_equal(T(a.p(i, j) * f[i]), T(a.q(j, i) * g[j]), tol)) return false;
    return true;
}

/// Scales block b by weights[b]. Weights must be nonnegative and sum to 1.
template <ProbabilityScalar T>
Marginals<T> materialize(const MarginalSolution<T>& sol, std::span<const T> weights, const Tolerance& tol = {}) {
    if (weights.size() != sol.blocks.size())
        throw Error(ErrorCode::WeightSumViolation, "expected " + std::to_string(sol.blocks.size()) + " weights, got " +
                                                       std::to_string(weights.size()));
    T total(0);
    for (const T& w : weights) {
        if (w < 0) throw Error(ErrorCode::WeightSumViolation, "negative block weight " + to_string(w));
        total += w;
    }
    if (!nearly_equal(total, T(1), tol))
        throw Error(ErrorCode::WeightSumViolation, "block weights sum to " + to_string(total));
    Marginals<T> out{std::vector<T>(sol.num_rows, T(0)), std::vector<T>(sol.num_cols, T(0))};
    for (std::size_t b = 0; b < sol.blocks.size(); ++b) {
        const auto& blk = sol.blocks[b];
        for (std::size_t k = 0; k < blk.rows.size(); ++k) out.f[blk.rows[k]] = weights[b] * blk.f[k];
        for (std::size_t k = 0; k < blk.cols.size(); ++k) out.g[blk.cols[k]] = weights[b] * blk.g[k];
    }
    return out;
}

/// Positive-column closed form:
///   f_i = (q(h0,i)/p(i,h0)) / sum_r q(h0,r)/p(r,h0),
///   g_j = (p(k0,j)/q(j,k0)) / sum_r p(k0,r)/q(r,k0).
template <ProbabilityScalar T>
Marginals<T> marginals_property4(const Assessment<T>& a, const Property4& p4, const Tolerance& tol = {}) {
    if (auto w = check_condition4(a, p4, tol))
        throw Error(ErrorCode::Condition4Violated,
                    "compatibility fails at (" + std::to_string(w->row + 1) + ", " + std::to_string(w->col + 1) + ")",
                    {w->row + 1, w->col + 1});
    return detail::property4_marginals(a, p4);
}

/// Strictly positive closed form:
///   f_i = (sum_h p(i,h)/q(h,i))^-1,  g_j = (sum_k q(j,k)/p(k,j))^-1.
template <ProbabilityScalar T>
Marginals<T> marginals_positive(const Assessment<T>& a, const Tolerance& tol = {}) {
    if (!is_strictly_positive(a, tol)) throw Error(ErrorCode::NotStrictlyPositive, "P and Q must be entrywise positive");
    if (auto w = check_condition4(a, Property4{0, 0}, tol))
        throw Error(ErrorCode::Condition4Violated,
                    "compatibility fails at (" + std::to_string(w->row + 1) + ", " + std::to_string(w->col + 1) + ")",
                    {w->row + 1, w->col + 1});
    Marginals<T> out{std::vector<T>(a.rows()), std::vector<T>(a.cols())};
    for (std::size_t i = 0; i < a.rows(); ++i) {
        T s(0);
        for (std::size_t h = 0; h < a.cols(); ++h) s += a.p(i, h) / a.q(h, i);
        out.f[i] = T(1) / s;
    }
    for (std::size_t j = 0; j < a.cols(); ++j) {
        T s(0);
        for (std::size_t k = 0; k < a.rows(); ++k) s += a.q(j, k) / a.p(k, j);
        out.g[j] = T(1) / s;
    }
    return out;
}

/// Connected closed form from the T/Z pair:
///   f_i = (sum_h t(i,h)/z(h,i))^-1,  g_j = (sum_k z(j,k)/t(k,j))^-1.
template <ProbabilityScalar T>
Marginals<T> marginals_connected(const Assessment<T>& a, const TZPair<T>& tz, const Tolerance& tol = {}) {
    if (auto w = check_condition6(a, tz, tol))
        throw Error(ErrorCode::Condition6Violated,
                    "ratio test fails at (" + std::to_string(w->row + 1) + ", " + std::to_string(w->col + 1) + ")",
                    {w->row + 1, w->col + 1});
    Marginals<T> out{std::vector<T>(a.rows()), std::vector<T>(a.cols())};
    for (std::size_t i = 0; i < a.rows(); ++i) {
        T s(0);
        for (std::size_t h = 0; h < a.cols(); ++h) s += tz.t(i, h) / tz.z(h, i);
        out.f[i] = T(1) / s;
    }
    for (std::size_t j = 0; j < a.cols(); ++j) {
        T s(0);
        for (std::size_t k = 0; k < a.rows(); ++k) s += tz.z(j, k) / tz.t(k, j);
        out.g[j] = T(1) / s;
    }
    return out;
}

/// Combines per-block solutions into the weighted family. Without explicit
/// weights every block gets 1/k.
template <ProbabilityScalar T>
MarginalSolution<T> marginals_blocks(std::vector<MarginalBlock<T>> parts,
                                     const std::optional<std::vector<T>>& weights = std::nullopt,
                                     const Tolerance& tol = {}) {
    if (parts.empty()) throw Error(ErrorCode::Infeasible, "no block admits a positive solution");
    MarginalSolution<T> sol;
    for (const auto& p : parts) {
        for (std::size_t r : p.rows) sol.num_rows = std::max(sol.num_rows, r + 1);
        for (std::size_t c : p.cols) sol.num_cols = std::max(sol.num_cols, c + 1);
    }
    sol.blocks = std::move(parts);
    sol.kind = sol.blocks.size() == 1 ? SolutionKind::unique : SolutionKind::family;
    sol.weight_freedom = sol.blocks.size() - 1;
    sol.method = "block-family";
    sol.weights = weights ? *weights : std::vector<T>(sol.blocks.size(), ratio<T>(1, static_cast<std::int64_t>(sol.blocks.size())));
    auto m = materialize(sol, std::span<const T>(sol.weights), tol);
    sol.f = std::move(m.f);
    sol.g = std::move(m.g);
    return sol;
}

namespace detail {

template <ProbabilityScalar T>
MarginalBlock<T> whole_block(const Marginals<T>& m) {
    return {iota_indices(m.f.size()), iota_indices(m.g.size()), m.f, m.g};
}

// General solver for the marginal system by ratio propagation.
//
// One-sided edges (exactly one of p_ij, q_ji positive) force the variable on
// the positive side to zero; zeros spread along two-sided edges. The
// remaining events split into components of the two-sided graph; each gets
// f = 1 at its smallest row and ratios f_i : g_j = q_ji : p_ij along a
// spanning tree. A component whose non-tree equations then fail can only
// carry weight zero.
template <ProbabilityScalar T>
MarginalSolution<T> propagate_system3(const Assessment<T>& a, const Tolerance& tol) {
    const std::size_t l = a.rows(), m = a.cols();
    const auto g = support_graph(a, tol);
    MarginalSolution<T> sol;
    sol.num_rows = l;
    sol.num_cols = m;
    sol.method = "system3-propagation";

    // Node ids: rows 0..l-1, columns l..l+m-1.
    std::vector<char> zero(l + m, 0);
    std::deque<std::size_t> queue;
    auto force = [&](std::size_t v) {
        if (!zero[v]) {
            zero[v] = 1;
            queue.push_back(v);
        }
    };
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j : g.row_neighbors(i)) {
            const auto fl = g.flags(i, j);
            if (fl.p_pos && !fl.q_pos) force(i);
            if (fl.q_pos && !fl.p_pos) force(l + j);
        }
    while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        if (v < l) {
            for (std::size_t j : g.row_neighbors(v))
                if (g.flags(v, j).both()) force(l + j);
        } else {
            for (std::size_t i : g.col_neighbors(v - l))
                if (g.flags(i, v - l).both()) force(i);
        }
    }
    for (std::size_t i = 0; i < l; ++i)
        if (zero[i]) sol.forced_zero_rows.push_back(i);
    for (std::size_t j = 0; j < m; ++j)
        if (zero[l + j]) sol.forced_zero_cols.push_back(j);

    std::vector<T> val(l + m, T(0));
    std::vector<char> seen(l + m, 0);
    for (std::size_t start = 0; start < l; ++start) {
        if (zero[start] || seen[start]) continue;
        MarginalBlock<T> blk;
        std::deque<std::size_t> bfs{start};
        seen[start] = 1;
        val[start] = T(1);
        while (!bfs.empty()) {
            const std::size_t v = bfs.front();
            bfs.pop_front();
            if (v < l) {
                blk.rows.push_back(v);
                for (std::size_t j : g.row_neighbors(v)) {
                    if (seen[l + j] || !g.flags(v, j).both()) continue;
                    seen[l + j] = 1;
                    val[l + j] = a.p(v, j) * val[v] / a.q(j, v);
                    bfs.push_back(l + j);
                }
            } else {
                const std::size_t j = v - l;
                blk.cols.push_back(j);
                for (std::size_t i : g.col_neighbors(j)) {
                    if (seen[i] || !g.flags(i, j).both()) continue;
                    seen[i] = 1;
                    val[i] = a.q(j, i) * val[v] / a.p(i, j);
                    bfs.push_back(i);
                }
            }
        }
        std::sort(blk.rows.begin(), blk.rows.end());
        std::sort(blk.cols.begin(), blk.cols.end());

        std::optional<PairWitness> broken;
        for (std::size_t i : blk.rows) {
            for (std::size_t j : g.row_neighbors(i)) {
                if (!nearly_equal(T(a.p(i, j) * val[i]), T(a.q(j, i) * val[l + j]), tol)) {
                    broken = PairWitness{i, j};
                    break;
                }
            }
            if (broken) break;
        }
        T fs(0), gs(0);
        for (std::size_t i : blk.rows) fs += val[i];
        for (std::size_t j : blk.cols) gs += val[l + j];
        if (!broken && !nearly_equal(fs, gs, tol)) broken = PairWitness{blk.rows.front(), blk.cols.front()};
        if (broken) {
            sol.zero_weight_blocks.push_back({blk.rows, blk.cols});
            sol.zero_weight_witnesses.push_back(*broken);
            continue;
        }
        for (std::size_t i : blk.rows) blk.f.push_back(val[i] / fs);
        for (std::size_t j : blk.cols) blk.g.push_back(val[l + j] / fs);
        sol.blocks.push_back(std::move(blk));
    }

    if (sol.blocks.empty()) {
        sol.kind = SolutionKind::infeasible;
        return sol;
    }
    sol.kind = sol.blocks.size() == 1 ? SolutionKind::unique : SolutionKind::family;
    sol.weight_freedom = sol.blocks.size() - 1;
    sol.weights.assign(sol.blocks.size(), ratio<T>(1, static_cast<std::int64_t>(sol.blocks.size())));
    auto mat = materialize(sol, std::span<const T>(sol.weights), tol);
    sol.f = std::move(mat.f);
    sol.g = std::move(mat.g);
    if (!satisfies_system3(a, std::span<const T>(sol.f), std::span<const T>(sol.g), tol))
        sol.warnings.push_back("materialized solution violates the marginal system beyond tolerance");
    return sol;
}

inline std::string witness_text(const std::optional<PairWitness>& pw) {
    if (!pw) return {};
    return " at (" + std::to_string(pw->row + 1) + ", " + std::to_string(pw->col + 1) + ")";
}

template <class T>
std::string witness_text(const CoherenceReport<T>& r) {
    if (r.cycle_witness) {
        std::string s = " on cycle i=(";
        for (std::size_t k = 0; k < r.cycle_witness->cycle.rows.size(); ++k)
            s += (k ? "," : "") + std::to_string(r.cycle_witness->cycle.rows[k] + 1);
        s += ") j=(";
        for (std::size_t k = 0; k < r.cycle_witness->cycle.cols.size(); ++k)
            s += (k ? "," : "") + std::to_string(r.cycle_witness->cycle.cols[k] + 1);
        return s + ")";
    }
    return witness_text(r.pair_witness);
}

template <ProbabilityScalar T>
void annotate_coherence(MarginalSolution<T>& sol, const CoherenceReport<T>& rep, bool allow_incoherent) {
    if (rep.verdict == Verdict::incoherent) {
        if (!allow_incoherent)
            throw Error(ErrorCode::IncoherentAssessment, "assessment is incoherent" + witness_text(rep));
        sol.warnings.push_back("incoherent assessment");
    } else if (rep.verdict == Verdict::undecided) {
        if (!allow_incoherent) throw Error(ErrorCode::Undecided, "coherence could not be decided: " + rep.detail);
        sol.warnings.push_back("coherence undecided");
    }
}

}  // namespace detail

/// General solver for the marginal system. The coherence verdict is computed as well:
/// an incoherent assessment is refused unless `allow_incoherent`, in which
/// case the solution of the marginal system comes back tagged with a warning. A system
/// without solutions is reported as kind infeasible.
template <ProbabilityScalar T>
MarginalSolution<T> solve_system3(const Assessment<T>& a, const SolveConfig& cfg = {}) {
    auto sol = detail::propagate_system3(a, cfg.tolerance);
    if (sol.kind == SolutionKind::infeasible) return sol;
    detail::annotate_coherence(sol, check_coherence(a, cfg.check()), cfg.allow_incoherent);
    return sol;
}

/// Marginals of a coherent assessment through the cheapest applicable
/// closed form, falling back to propagation.
template <ProbabilityScalar T>
MarginalSolution<T> solve_marginals(const Assessment<T>& a, const SolveConfig& cfg = {}) {
    const auto& tol = cfg.tolerance;
    const auto rep = check_coherence(a, cfg.check());
    if (rep.verdict != Verdict::coherent) {
        auto sol = detail::propagate_system3(a, tol);
        detail::annotate_coherence(sol, rep, cfg.allow_incoherent);
        if (sol.kind == SolutionKind::infeasible) throw Error(ErrorCode::Infeasible, "the marginal system has no solution");
        return sol;
    }

    MarginalSolution<T> sol;
    if (is_strictly_positive(a, tol)) {
        sol = marginals_blocks<T>(std::vector<MarginalBlock<T>>{detail::whole_block(marginals_positive(a, tol))},
                               std::nullopt, tol);
        sol.method = "positive-closed-form";
    } else if (has_property6(a, tol)) {
        const auto comps = connected_components(support_graph(a, tol));
        std::vector<MarginalBlock<T>> parts;
        for (const Block& block : comps.blocks) {
            const auto sub = restrict_assessment(a, std::span<const std::size_t>(block.rows),
                                                 std::span<const std::size_t>(block.cols), tol);
            auto m = marginals_connected(sub, tz_for(sub, tol), tol);
            parts.push_back({block.rows, block.cols, std::move(m.f), std::move(m.g)});
        }
        sol = marginals_blocks<T>(std::move(parts), std::nullopt, tol);
        sol.method = "TZ-closed-form";
    } else if (auto p4 = find_property4(a, tol)) {
        sol = marginals_blocks<T>(std::vector<MarginalBlock<T>>{detail::whole_block(marginals_property4(a, *p4, tol))},
                               std::nullopt, tol);
        sol.method = "property4-closed-form";
    } else {
        sol = detail::propagate_system3(a, tol);
        if (sol.kind == SolutionKind::infeasible)
            throw Error(ErrorCode::Infeasible, "the marginal system has no solution for a coherent assessment");
    }
    if (!satisfies_system3(a, std::span<const T>(sol.f), std::span<const T>(sol.g), tol))
        sol.warnings.push_back("materialized solution violates the marginal system beyond tolerance");
    return sol;
}

}  // namespace cohere
