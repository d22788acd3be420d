// Copyright (C) 2026 The cohere authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "cohere/error.hpp"
#include "cohere/matrix.hpp"

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cohere {

/// Alternating closed walk A_{i_1} B_{j_1} A_{i_2} ... B_{j_n} A_{i_1} over
/// distinct rows and distinct columns (0-based).
struct Cycle {
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;

    std::size_t length() const noexcept { return rows.size(); }
    friend bool operator==(const Cycle&, const Cycle&) = default;
};

template <class T>
struct CycleProducts {
    T lhs;
    T rhs;
};

/// Forward and backward products around `c`:
///   lhs = prod_k p(i_k, j_k) q(j_k, i_{k+1})
///   rhs = prod_k p(i_{k+1}, j_k) q(j_k, i_k)
/// with i_{n+1} = i_1. Coherence requires lhs == rhs for every cycle.
template <ProbabilityScalar T>
CycleProducts<T> cycle_products(const Assessment<T>& a, const Cycle& c) {
    const std::size_t n = c.length();
    if (n == 0 || c.cols.size() != n) throw Error(ErrorCode::InvalidCycle, "cycle needs as many rows as columns");
    for (std::size_t k = 0; k < n; ++k) {
        if (c.rows[k] >= a.rows() || c.cols[k] >= a.cols()) {
            throw Error(ErrorCode::IndexOutOfRange,
                        "cycle position " + std::to_string(k + 1) + " refers to (" + std::to_string(c.rows[k] + 1) +
                            ", " + std::to_string(c.cols[k] + 1) + ")",
                        {c.rows[k] + 1, c.cols[k] + 1});
        }
        for (std::size_t h = 0; h < k; ++h)
            if (c.rows[h] == c.rows[k] || c.cols[h] == c.cols[k])
                throw Error(ErrorCode::InvalidCycle, "cycle repeats a row or a column index");
    }
    T lhs(1), rhs(1);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t next = c.rows[(k + 1) % n];
        lhs *= a.p(c.rows[k], c.cols[k]) * a.q(c.cols[k], next);
        rhs *= a.p(next, c.cols[k]) * a.q(c.cols[k], c.rows[k]);
    }
    return {lhs, rhs};
}

/// Number of cycles for_each_cycle visits (lengths 2..max_length).
inline double cycle_count(std::size_t nrows, std::size_t ncols, std::size_t max_length) {
    double total = 0;
    for (std::size_t n = 2; n <= std::min({nrows, ncols, max_length}); ++n) {
        double rows_part = 1, cols_part = 1;
        // C(nrows, n) * (n - 1)!
        for (std::size_t k = 0; k < n; ++k) rows_part *= static_cast<double>(nrows - k) / static_cast<double>(k + 1);
        for (std::size_t k = 1; k < n; ++k) rows_part *= static_cast<double>(k);
        for (std::size_t k = 0; k < n; ++k) cols_part *= static_cast<double>(ncols - k);
        total += rows_part * cols_part;
    }
    return total;
}

/// Visits every cycle of length 2..max_length over the given row and column
/// sets, once per rotation class: i_1 is the smallest row of the cycle, the
/// remaining rows run over all orders and the columns over all injections.
/// Order: by length, then row subset, row order and column tuple, all
/// lexicographic. The visitor returns false to stop; the function returns
/// false iff it was stopped.
inline bool for_each_cycle(std::span<const std::size_t> row_set, std::span<const std::size_t> col_set,
                           std::size_t max_length, const std::function<bool(const Cycle&)>& visit) {
    std::vector<std::size_t> rows(row_set.begin(), row_set.end());
    std::vector<std::size_t> cols(col_set.begin(), col_set.end());
    std::sort(rows.begin(), rows.end());
    std::sort(cols.begin(), cols.end());
    const std::size_t top = std::min({rows.size(), cols.size(), max_length});

    Cycle c;
    std::vector<char> col_used(cols.size(), 0);

    // Fill c.cols[pos..n) with unused columns in lexicographic order.
    std::function<bool(std::size_t, std::size_t)> place_cols = [&](std::size_t pos, std::size_t n) -> bool {
        if (pos == n) return visit(c);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (col_used[k]) continue;
            col_used[k] = 1;
            c.cols[pos] = cols[k];
            const bool go_on = place_cols(pos + 1, n);
            col_used[k] = 0;
            if (!go_on) return false;
        }
        return true;
    };

    for (std::size_t n = 2; n <= top; ++n) {
        c.rows.assign(n, 0);
        c.cols.assign(n, 0);
        // Row subsets of size n, lexicographic, via a selector mask.
        std::vector<char> pick(rows.size(), 0);
        std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n), 1);
        do {
            std::vector<std::size_t> subset;
            for (std::size_t k = 0; k < rows.size(); ++k)
                if (pick[k]) subset.push_back(rows[k]);
            c.rows[0] = subset[0];
            std::vector<std::size_t> rest(subset.begin() + 1, subset.end());
            do {
                std::copy(rest.begin(), rest.end(), c.rows.begin() + 1);
                if (!place_cols(0, n)) return false;
            } while (std::next_permutation(rest.begin(), rest.end()));
        } while (std::prev_permutation(pick.begin(), pick.end()));
    }
    return true;
}

}  // namespace cohere
