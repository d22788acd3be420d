// Copyright (C) 2026 The cohere authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "cohere/cycle.hpp"
#include "cohere/error.hpp"
#include "cohere/matrix.hpp"
#include "cohere/scalar.hpp"
#include "cohere/support.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cohere {

/// Size guard for exhaustive cycle enumeration.
struct BruteForceLimits {
    std::size_t max_cells = 36;
    std::size_t max_order = 6;

    bool admits(std::size_t nrows, std::size_t ncols) const {
        return nrows * ncols <= max_cells && std::min(nrows, ncols) <= max_order;
    }
};

struct CheckConfig {
    Tolerance tolerance;
    BruteForceLimits brute_force;
};

enum class Verdict { coherent, incoherent, undecided };

/// Which route decided the verdict.
enum class Method { condition4_residual, tz_condition6, block_recursion, brute_force };

constexpr std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::coherent: return "coherent";
        case Verdict::incoherent: return "incoherent";
        case Verdict::undecided: return "undecided";
    }
    return "?";
}

constexpr std::string_view method_name(Method m) {
    switch (m) {
        case Method::condition4_residual: return "condition4+residual";
        case Method::tz_condition6: return "TZ-condition6";
        case Method::block_recursion: return "block-recursion";
        case Method::brute_force: return "brute-force";
    }
    return "?";
}

/// An (i, j) pair at which a compatibility equation fails (0-based).
struct PairWitness {
    std::size_t row = 0;
    std::size_t col = 0;
    friend bool operator==(const PairWitness&, const PairWitness&) = default;
};

template <class T>
struct CycleWitness {
    Cycle cycle;
    T lhs;
    T rhs;
};

template <class T>
struct BlockReport {
    Block block;
    Verdict verdict = Verdict::coherent;
    std::size_t gamma = 0;
    std::optional<PairWitness> witness;
};

template <class T>
struct CoherenceReport {
    Verdict verdict = Verdict::undecided;
    Method method = Method::brute_force;
    std::optional<CycleWitness<T>> cycle_witness;
    std::optional<PairWitness> pair_witness;
    std::vector<BlockReport<T>> blocks;
    std::optional<Property4> property4;
    std::string detail;

    bool coherent() const noexcept { return verdict == Verdict::coherent; }
};

template <class T>
struct Marginals {
    std::vector<T> f;
    std::vector<T> g;
};

namespace detail {

template <ProbabilityScalar T>
std::optional<CycleWitness<T>> first_cycle_mismatch(const Assessment<T>& a, std::span<const std::size_t> rows,
                                                    std::span<const std::size_t> cols, const Tolerance& tol) {
    std::optional<CycleWitness<T>> found;
    for_each_cycle(rows, cols, std::min(rows.size(), cols.size()), [&](const Cycle& c) {
        auto [lhs, rhs] = cycle_products(a, c);
        if (nearly_equal(lhs, rhs, tol)) return true;
        found = CycleWitness<T>{c, std::move(lhs), std::move(rhs)};
        return false;
    });
    return found;
}

inline std::vector<std::size_t> iota_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = k;
    return v;
}

template <ProbabilityScalar T>
void require_property4(const Assessment<T>& a, const Property4& p4, const Tolerance& tol) {
    if (p4.h0 >= a.cols() || p4.k0 >= a.rows())
        throw Error(ErrorCode::IndexOutOfRange, "h0/k0 outside the matrices", {p4.h0 + 1, p4.k0 + 1});
    for (std::size_t i = 0; i < a.rows(); ++i)
        if (!is_positive(a.p(i, p4.h0), tol))
            throw Error(ErrorCode::Property4NotSatisfied,
                        "p(" + std::to_string(i + 1) + ", " + std::to_string(p4.h0 + 1) + ") is not positive",
                        {i + 1, p4.h0 + 1});
    for (std::size_t j = 0; j < a.cols(); ++j)
        if (!is_positive(a.q(j, p4.k0), tol))
            throw Error(ErrorCode::Property4NotSatisfied,
                        "q(" + std::to_string(j + 1) + ", " + std::to_string(p4.k0 + 1) + ") is not positive",
                        {j + 1, p4.k0 + 1});
}

// Closed form for the marginal system when P and Q each have a positive column, without the compatibility check:
//   f_i ∝ q(h0, i) / p(i, h0),   g_j ∝ p(k0, j) / q(j, k0).
template <ProbabilityScalar T>
Marginals<T> property4_marginals(const Assessment<T>& a, const Property4& p4) {
    Marginals<T> out{std::vector<T>(a.rows()), std::vector<T>(a.cols())};
    T fsum(0), gsum(0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        out.f[i] = a.q(p4.h0, i) / a.p(i, p4.h0);
        fsum += out.f[i];
    }
    for (std::size_t j = 0; j < a.cols(); ++j) {
        out.g[j] = a.p(p4.k0, j) / a.q(j, p4.k0);
        gsum += out.g[j];
    }
    for (auto& x : out.f) x /= fsum;
    for (auto& x : out.g) x /= gsum;
    return out;
}

}  // namespace detail

/// Exhaustive check of the cycle condition over all cycles of length
/// 2..min(l, m). Refuses (undecided) instances beyond `limits`.
template <ProbabilityScalar T>
CoherenceReport<T> brute_force_check(const Assessment<T>& a, const BruteForceLimits& limits = {},
                                     const Tolerance& tol = {}) {
    CoherenceReport<T> report;
    report.method = Method::brute_force;
    if (!limits.admits(a.rows(), a.cols())) {
        report.verdict = Verdict::undecided;
        report.detail = "TooLarge: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                        " exceeds the brute-force limits (cells " + std::to_string(limits.max_cells) + ", order " +
                        std::to_string(limits.max_order) + ")";
        return report;
    }
    const auto rows = detail::iota_indices(a.rows());
    const auto cols = detail::iota_indices(a.cols());
    report.cycle_witness = detail::first_cycle_mismatch(a, std::span<const std::size_t>(rows),
                                                        std::span<const std::size_t>(cols), tol);
    report.verdict = report.cycle_witness ? Verdict::incoherent : Verdict::coherent;
    return report;
}

/// Compatibility test when P and Q each have a positive column:
///   p(i,j) q(j,k0) p(k0,h0) q(h0,i) == p(i,h0) q(h0,k0) p(k0,j) q(j,i)  for all i, j.
/// Returns the first failing (i, j), or nothing when the marginal system is compatible.
template <ProbabilityScalar T>
std::optional<PairWitness> check_condition4(const Assessment<T>& a, const Property4& p4, const Tolerance& tol = {}) {
    detail::require_property4(a, p4, tol);
    const auto& [h0, k0] = p4;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const T lhs = a.p(i, j) * a.q(j, k0) * a.p(k0, h0) * a.q(h0, i);
            const T rhs = a.p(i, h0) * a.q(h0, k0) * a.p(k0, j) * a.q(j, i);
            if (!nearly_equal(lhs, rhs, tol)) return PairWitness{i, j};
        }
    return std::nullopt;
}

template <class T>
struct ResidualResult {
    enum class Status { ok, witness, too_large };
    Status status = Status::ok;
    std::optional<CycleWitness<T>> witness;
    std::vector<std::size_t> zero_rows;
    std::vector<std::size_t> zero_cols;
};

/// Given a solution (f, g) of the marginal system, the cycle condition only has to be
/// checked on cycles whose rows all have f_i = 0 and whose columns all have
/// g_j = 0. Any cycle that mixes zero and positive marginals has both
/// products equal to zero, and cycles over positive marginals balance
/// through p_ij f_i = q_ji g_j.
template <ProbabilityScalar T>
ResidualResult<T> residual_zero_cycle_check(const Assessment<T>& a, std::span<const T> f, std::span<const T> g,
                                            const BruteForceLimits& limits = {}, const Tolerance& tol = {}) {
    if (f.size() != a.rows() || g.size() != a.cols())
        throw Error(ErrorCode::DimensionMismatch, "marginal vectors do not match the assessment",
                    {f.size(), g.size(), a.rows(), a.cols()});
    ResidualResult<T> out;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!is_positive(f[i], tol)) out.zero_rows.push_back(i);
    for (std::size_t j = 0; j < g.size(); ++j)
        if (!is_positive(g[j], tol)) out.zero_cols.push_back(j);
    if (out.zero_rows.size() < 2 || out.zero_cols.size() < 2) return out;
    if (!limits.admits(out.zero_rows.size(), out.zero_cols.size())) {
        out.status = ResidualResult<T>::Status::too_large;
        return out;
    }
    out.witness = detail::first_cycle_mismatch(a, std::span<const std::size_t>(out.zero_rows),
                                               std::span<const std::size_t>(out.zero_cols), tol);
    if (out.witness) out.status = ResidualResult<T>::Status::witness;
    return out;
}

template <class T>
struct UVPair {
    Matrix<T> u;
    Matrix<T> v;
};

/// U keeps p_ij on the tree edges, V keeps q_ji on the same edges, zero elsewhere.
template <ProbabilityScalar T>
UVPair<T> build_uv(const Assessment<T>& a, std::span<const Edge> tree, const Tolerance& tol = {}) {
    if (tree.size() + 1 != a.rows() + a.cols())
        throw Error(ErrorCode::NoBothPositiveTree,
                    "tree has " + std::to_string(tree.size()) + " edges, expected " +
                        std::to_string(a.rows() + a.cols() - 1));
    UVPair<T> uv{Matrix<T>(a.rows(), a.cols()), Matrix<T>(a.cols(), a.rows())};
    for (const Edge& e : tree) {
        if (e.row >= a.rows() || e.col >= a.cols())
            throw Error(ErrorCode::IndexOutOfRange, "tree edge outside the assessment", {e.row + 1, e.col + 1});
        if (!is_positive(a.p(e.row, e.col), tol) || !is_positive(a.q(e.col, e.row), tol))
            throw Error(ErrorCode::NoBothPositiveTree,
                        "tree edge (" + std::to_string(e.row + 1) + ", " + std::to_string(e.col + 1) +
                            ") needs p_ij > 0 and q_ji > 0",
                        {e.row + 1, e.col + 1});
        uv.u(e.row, e.col) = a.p(e.row, e.col);
        uv.v(e.col, e.row) = a.q(e.col, e.row);
    }
    return uv;
}

template <class T>
struct TZPair {
    Matrix<T> u;
    Matrix<T> v;
    Matrix<T> t;  // (UV)^(gamma-1) U, l x m
    Matrix<T> z;  // (VU)^(gamma-1) V, m x l
    std::size_t gamma = 0;
};

template <ProbabilityScalar T>
bool all_positive(const Matrix<T>& m, const Tolerance& tol = {}) {
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            if (!is_positive(m(r, c), tol)) return false;
    return true;
}

/// Smallest gamma for which (UV)^(gamma-1) U and (VU)^(gamma-1) V are both
/// strictly positive. For a spanning tree gamma never exceeds min(l, m).
template <ProbabilityScalar T>
TZPair<T> compute_tz(Matrix<T> U, Matrix<T> V, const Tolerance& tol = {}) {
    if (U.rows() != V.cols() || U.cols() != V.rows())
        throw Error(ErrorCode::DimensionMismatch, "U and V are not transposed shapes",
                    {U.rows(), U.cols(), V.rows(), V.cols()});
    const std::size_t bound = std::min(U.rows(), U.cols());
    const Matrix<T> uv = U * V;
    const Matrix<T> vu = V * U;
    Matrix<T> t = U;
    Matrix<T> z = V;
    for (std::size_t gamma = 1; gamma <= bound; ++gamma) {
        if (gamma > 1) {
            t = uv * t;
            z = vu * z;
        }
        if (all_positive(t, tol) && all_positive(z, tol))
            return TZPair<T>{std::move(U), std::move(V), std::move(t), std::move(z), gamma};
    }
    throw Error(ErrorCode::GammaBoundExceeded,
                "T and Z are not strictly positive for any gamma <= " + std::to_string(bound));
}

/// t_ij q_ji == z_ji p_ij for every p_ij > 0 (the ratio test, cross-multiplied).
/// Returns the first failing (i, j), or nothing when the marginal system is compatible.
template <ProbabilityScalar T>
std::optional<PairWitness> check_condition6(const Assessment<T>& a, const TZPair<T>& tz, const Tolerance& tol = {}) {
    if (tz.t.rows() != a.rows() || tz.t.cols() != a.cols())
        throw Error(ErrorCode::DimensionMismatch, "T does not match the assessment");
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (!is_positive(a.p(i, j), tol)) continue;
            if (!nearly_equal(T(tz.t(i, j) * a.q(j, i)), T(tz.z(j, i) * a.p(i, j)), tol)) return PairWitness{i, j};
        }
    return std::nullopt;
}

/// Builds the T/Z pair of a connected assessment whose P and Q supports are transposes from
/// the deterministic breadth-first spanning tree.
template <ProbabilityScalar T>
TZPair<T> tz_for(const Assessment<T>& a, const Tolerance& tol = {}) {
    const auto g = support_graph(a, tol);
    const Block whole{detail::iota_indices(a.rows()), detail::iota_indices(a.cols())};
    const auto tree = spanning_tree(g, whole);
    auto uv = build_uv(a, std::span<const Edge>(tree), tol);
    return compute_tz(std::move(uv.u), std::move(uv.v), tol);
}

namespace detail {

template <ProbabilityScalar T>
CoherenceReport<T> check_by_blocks(const Assessment<T>& a, const CheckConfig& cfg) {
    const auto& tol = cfg.tolerance;
    CoherenceReport<T> report;
    const auto comps = connected_components(support_graph(a, tol));
    report.method = comps.size() == 1 ? Method::tz_condition6 : Method::block_recursion;
    report.verdict = Verdict::coherent;
    for (const Block& block : comps.blocks) {
        BlockReport<T> br;
        br.block = block;
        const auto sub = restrict_assessment(a, std::span<const std::size_t>(block.rows),
                                             std::span<const std::size_t>(block.cols), tol);
        const auto tz = tz_for(sub, tol);
        br.gamma = tz.gamma;
        if (auto w = check_condition6(sub, tz, tol)) {
            br.verdict = Verdict::incoherent;
            br.witness = PairWitness{block.rows[w->row], block.cols[w->col]};
            if (report.verdict == Verdict::coherent) {
                report.verdict = Verdict::incoherent;
                report.pair_witness = br.witness;
            }
        }
        report.blocks.push_back(std::move(br));
    }
    return report;
}

template <ProbabilityScalar T>
CoherenceReport<T> check_by_property4(const Assessment<T>& a, const Property4& p4, const CheckConfig& cfg) {
    const auto& tol = cfg.tolerance;
    CoherenceReport<T> report;
    report.method = Method::condition4_residual;
    report.property4 = p4;
    if (auto w = check_condition4(a, p4, tol)) {
        report.verdict = Verdict::incoherent;
        report.pair_witness = w;
        report.detail = "the marginal system is incompatible";
        return report;
    }
    const auto m = property4_marginals(a, p4);
    auto residual = residual_zero_cycle_check(a, std::span<const T>(m.f), std::span<const T>(m.g), cfg.brute_force, tol);
    switch (residual.status) {
        case ResidualResult<T>::Status::ok:
            report.verdict = Verdict::coherent;
            break;
        case ResidualResult<T>::Status::witness:
            report.verdict = Verdict::incoherent;
            report.cycle_witness = std::move(residual.witness);
            report.detail = "cycle condition fails among zero-probability events";
            break;
        case ResidualResult<T>::Status::too_large:
            report.verdict = Verdict::undecided;
            report.detail = "TooLarge: zero-marginal sets " + std::to_string(residual.zero_rows.size()) + "x" +
                            std::to_string(residual.zero_cols.size()) + " exceed the brute-force limits";
            break;
    }
    return report;
}

}  // namespace detail

/// Coherence of (P, Q). Routes: matching supports -> per-block T/Z test;
/// otherwise two positive columns -> compatibility plus residual cycles on
/// zero marginals; otherwise exhaustive cycle enumeration.
template <ProbabilityScalar T>
CoherenceReport<T> check_coherence(const Assessment<T>& a, const CheckConfig& cfg = {}) {
    if (has_property6(a, cfg.tolerance)) return detail::check_by_blocks(a, cfg);
    if (auto p4 = find_property4(a, cfg.tolerance)) return detail::check_by_property4(a, *p4, cfg);
    return brute_force_check(a, cfg.brute_force, cfg.tolerance);
}

}  // namespace cohere
