// Copyright (C) 2026 The cohere authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "cohere/error.hpp"
#include "cohere/matrix.hpp"
#include "cohere/scalar.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace cohere {

/// Boolean l x m pattern, e.g. the positive entries of a matrix or the
/// support requested from the joint sampler.
class SupportMask {
public:
    SupportMask() = default;
    SupportMask(std::size_t rows, std::size_t cols, bool fill = false)
        : rows_(rows), cols_(cols), cells_(rows * cols, fill ? 1 : 0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool operator()(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c] != 0; }
    void set(std::size_t r, std::size_t c, bool on = true) { cells_[r * cols_ + c] = on ? 1 : 0; }
    std::size_t count() const { return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1)); }

    friend bool operator==(const SupportMask&, const SupportMask&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::uint8_t> cells_;
};

template <ProbabilityScalar T>
SupportMask positive_pattern(const Matrix<T>& m, const Tolerance& tol = {}) {
    SupportMask mask(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            if (is_positive(m(r, c), tol)) mask.set(r, c);
    return mask;
}

/// A row-column pair (A_i, B_j), 0-based.
struct Edge {
    std::size_t row = 0;
    std::size_t col = 0;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Positivity flags of the pair (p_ij, q_ji).
struct EdgeFlags {
    bool p_pos = false;
    bool q_pos = false;
    bool present() const noexcept { return p_pos || q_pos; }
    bool both() const noexcept { return p_pos && q_pos; }
};

/// Bipartite graph on the row events A_1..A_l and the column events
/// B_1..B_m. An edge joins A_i and B_j when p_ij > 0 or q_ji > 0.
class SupportGraph {
public:
    SupportGraph(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), flags_(rows * cols), row_adj_(rows), col_adj_(cols) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    const EdgeFlags& flags(std::size_t i, std::size_t j) const { return flags_[i * cols_ + j]; }
    bool has_edge(std::size_t i, std::size_t j) const { return flags(i, j).present(); }

    /// Neighbours in ascending order.
    const std::vector<std::size_t>& row_neighbors(std::size_t i) const { return row_adj_[i]; }
    const std::vector<std::size_t>& col_neighbors(std::size_t j) const { return col_adj_[j]; }

    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j : row_adj_[i]) out.push_back({i, j});
        return out;
    }

    void set_flags(std::size_t i, std::size_t j, EdgeFlags f) {
        const bool was = has_edge(i, j);
        flags_[i * cols_ + j] = f;
        if (f.present() && !was) {
            row_adj_[i].insert(std::upper_bound(row_adj_[i].begin(), row_adj_[i].end(), j), j);
            col_adj_[j].insert(std::upper_bound(col_adj_[j].begin(), col_adj_[j].end(), i), i);
        } else if (!f.present() && was) {
            std::erase(row_adj_[i], j);
            std::erase(col_adj_[j], i);
        }
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<EdgeFlags> flags_;
    std::vector<std::vector<std::size_t>> row_adj_;
    std::vector<std::vector<std::size_t>> col_adj_;
};

template <ProbabilityScalar T>
SupportGraph support_graph(const Assessment<T>& a, const Tolerance& tol = {}) {
    SupportGraph g(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            g.set_flags(i, j, {is_positive(a.p(i, j), tol), is_positive(a.q(j, i), tol)});
    return g;
}

/// One connected component: sorted 0-based row and column indices.
struct Block {
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;
    friend bool operator==(const Block&, const Block&) = default;
};

struct BlockDecomposition {
    std::vector<Block> blocks;
    std::size_t size() const noexcept { return blocks.size(); }
};

namespace detail {

// Components of a bipartite graph given through adjacency callbacks. Node
// ids: rows 0..l-1, columns l..l+m-1. Components are ordered by their
// smallest row index; row-less components (isolated columns) come last.
template <class RowNbrs, class ColNbrs>
std::vector<Block> bipartite_components(std::size_t rows, std::size_t cols, RowNbrs&& row_nbrs, ColNbrs&& col_nbrs) {
    std::vector<int> seen(rows + cols, 0);
    std::vector<Block> out;
    auto sweep = [&](std::size_t start) {
        Block b;
        std::deque<std::size_t> queue{start};
        seen[start] = 1;
        while (!queue.empty()) {
            const std::size_t v = queue.front();
            queue.pop_front();
            if (v < rows) {
                b.rows.push_back(v);
                for (std::size_t j : row_nbrs(v))
                    if (!seen[rows + j]) {
                        seen[rows + j] = 1;
                        queue.push_back(rows + j);
                    }
            } else {
                b.cols.push_back(v - rows);
                for (std::size_t i : col_nbrs(v - rows))
                    if (!seen[i]) {
                        seen[i] = 1;
                        queue.push_back(i);
                    }
            }
        }
        std::sort(b.rows.begin(), b.rows.end());
        std::sort(b.cols.begin(), b.cols.end());
        out.push_back(std::move(b));
    };
    for (std::size_t v = 0; v < rows + cols; ++v)
        if (!seen[v]) sweep(v);
    return out;
}

inline std::vector<std::vector<std::size_t>> mask_row_adjacency(const SupportMask& mask) {
    std::vector<std::vector<std::size_t>> adj(mask.rows());
    for (std::size_t r = 0; r < mask.rows(); ++r)
        for (std::size_t c = 0; c < mask.cols(); ++c)
            if (mask(r, c)) adj[r].push_back(c);
    return adj;
}

inline std::vector<std::vector<std::size_t>> mask_col_adjacency(const SupportMask& mask) {
    std::vector<std::vector<std::size_t>> adj(mask.cols());
    for (std::size_t r = 0; r < mask.rows(); ++r)
        for (std::size_t c = 0; c < mask.cols(); ++c)
            if (mask(r, c)) adj[c].push_back(r);
    return adj;
}

}  // namespace detail

/// Connected components of the support graph, ordered by smallest row index.
inline BlockDecomposition connected_components(const SupportGraph& g) {
    return {detail::bipartite_components(
        g.rows(), g.cols(), [&](std::size_t i) -> const auto& { return g.row_neighbors(i); },
        [&](std::size_t j) -> const auto& { return g.col_neighbors(j); })};
}

/// Components of the bipartite graph of a boolean pattern.
inline BlockDecomposition pattern_components(const SupportMask& mask) {
    const auto row_adj = detail::mask_row_adjacency(mask);
    const auto col_adj = detail::mask_col_adjacency(mask);
    return {detail::bipartite_components(
        mask.rows(), mask.cols(), [&](std::size_t i) -> const auto& { return row_adj[i]; },
        [&](std::size_t j) -> const auto& { return col_adj[j]; })};
}

/// A pattern is connected when no row and column permutation brings it to
/// the form [[A, 0], [0, B]] with A and B each owning at least one row and
/// one column. On the bipartite graph that is: its components cannot be
/// split into two groups that both contain a row and a column.
inline bool is_connected(const SupportMask& mask) {
    const auto comps = pattern_components(mask);
    std::size_t mixed = 0, lone_rows = 0, lone_cols = 0;
    for (const auto& b : comps.blocks) {
        if (!b.rows.empty() && !b.cols.empty())
            ++mixed;
        else if (!b.rows.empty())
            ++lone_rows;
        else
            ++lone_cols;
    }
    if (mixed >= 2) return false;
    if (mixed == 1) return !(lone_rows > 0 && lone_cols > 0);
    return !(lone_rows >= 2 && lone_cols >= 2);
}

template <ProbabilityScalar T>
bool is_connected(const ProbMatrix<T>& m, const Tolerance& tol = {}) {
    return is_connected(positive_pattern(m.matrix(), tol));
}

/// Spanning tree of one block over the edges where both p_ij and q_ji are
/// positive. Breadth first from the block's smallest row, neighbours in
/// ascending order; edges are returned in discovery order.
inline std::vector<Edge> spanning_tree(const SupportGraph& g, const Block& block) {
    if (block.rows.empty() || block.cols.empty()) {
        throw Error(ErrorCode::NoBothPositiveTree, "block needs at least one row and one column");
    }
    const std::size_t l = g.rows();
    std::vector<int> seen(l + g.cols(), 0);
    std::vector<Edge> tree;
    std::deque<std::size_t> queue{block.rows.front()};
    seen[block.rows.front()] = 1;
    std::size_t reached = 1;
    while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        if (v < l) {
            for (std::size_t j : g.row_neighbors(v))
                if (!seen[l + j] && g.flags(v, j).both()) {
                    seen[l + j] = 1;
                    ++reached;
                    tree.push_back({v, j});
                    queue.push_back(l + j);
                }
        } else {
            const std::size_t j = v - l;
            for (std::size_t i : g.col_neighbors(j))
                if (!seen[i] && g.flags(i, j).both()) {
                    seen[i] = 1;
                    ++reached;
                    tree.push_back({i, j});
                    queue.push_back(i);
                }
        }
    }
    if (reached != block.rows.size() + block.cols.size()) {
        throw Error(ErrorCode::NoBothPositiveTree,
                    "edges with p_ij > 0 and q_ji > 0 reach " + std::to_string(reached) + " of " +
                        std::to_string(block.rows.size() + block.cols.size()) + " events of the block");
    }
    return tree;
}

/// Column h0 of P and column k0 of Q that are entirely positive (0-based).
struct Property4 {
    std::size_t h0 = 0;
    std::size_t k0 = 0;
    friend bool operator==(const Property4&, const Property4&) = default;
};

template <ProbabilityScalar T>
std::optional<Property4> find_property4(const Assessment<T>& a, const Tolerance& tol = {}) {
    auto positive_column = [&](const ProbMatrix<T>& m) -> std::optional<std::size_t> {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            bool all = true;
            for (std::size_t r = 0; r < m.rows() && all; ++r) all = is_positive(m(r, c), tol);
            if (all) return c;
        }
        return std::nullopt;
    };
    const auto h0 = positive_column(a.P());
    const auto k0 = positive_column(a.Q());
    if (!h0 || !k0) return std::nullopt;
    return Property4{*h0, *k0};
}

/// p_ij > 0 exactly when q_ji > 0.
template <ProbabilityScalar T>
bool has_property6(const Assessment<T>& a, const Tolerance& tol = {}) {
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (is_positive(a.p(i, j), tol) != is_positive(a.q(j, i), tol)) return false;
    return true;
}

template <ProbabilityScalar T>
bool is_strictly_positive(const Assessment<T>& a, const Tolerance& tol = {}) {
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (!is_positive(a.p(i, j), tol) || !is_positive(a.q(j, i), tol)) return false;
    return true;
}

}  // namespace cohere
