// Copyright (C) 2026 The cohere authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "cohere/coherence.hpp"
#include "cohere/error.hpp"
#include "cohere/marginals.hpp"
#include "cohere/matrix.hpp"
#include "cohere/oracle.hpp"
#include "cohere/scalar.hpp"
#include "cohere/support.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace cohere::io {

using Json = nlohmann::ordered_json;

/// One matrix entry as read: the exact value when the source allows it
/// (integer, "a/b" or decimal string), otherwise only a double.
struct RawEntry {
    std::optional<Rational> exact;
    double approx = 0.0;
};

using RawGrid = std::vector<std::vector<RawEntry>>;

struct RawAssessment {
    RawGrid p;
    RawGrid q;

    std::size_t rows() const { return p.size(); }
    std::size_t cols() const { return p.empty() ? 0 : p.front().size(); }

    /// First entry with no exact value, as (matrix name, row, col), 1-based.
    std::optional<std::tuple<char, std::size_t, std::size_t>> first_inexact() const {
        for (char name : {'P', 'Q'}) {
            const RawGrid& grid = name == 'P' ? p : q;
            for (std::size_t r = 0; r < grid.size(); ++r)
                for (std::size_t c = 0; c < grid[r].size(); ++c)
                    if (!grid[r][c].exact) return std::make_tuple(name, r + 1, c + 1);
        }
        return std::nullopt;
    }
};

namespace detail {

inline RawEntry parse_entry(const Json& v, char name, std::size_t r, std::size_t c) {
    const auto where = std::string(1, name) + " entry (" + std::to_string(r + 1) + ", " + std::to_string(c + 1) + ")";
    RawEntry e;
    if (v.is_number_integer() || v.is_number_unsigned()) {
        e.exact = v.is_number_unsigned() ? Rational(std::to_string(v.get<std::uint64_t>()))
                                         : Rational(std::to_string(v.get<std::int64_t>()));
        e.approx = e.exact->get_d();
    } else if (v.is_number_float()) {
        e.approx = v.get<double>();
        if (!std::isfinite(e.approx)) throw Error(ErrorCode::ParseError, where + " is not finite", {r + 1, c + 1});
    } else if (v.is_string()) {
        auto parsed = parse_rational(v.get<std::string>());
        if (!parsed)
            throw Error(ErrorCode::ParseError, where + " is not a number or fraction: \"" + v.get<std::string>() + "\"",
                        {r + 1, c + 1});
        e.exact = *parsed;
        e.approx = parsed->get_d();
    } else {
        throw Error(ErrorCode::ParseError, where + " must be a number or a fraction string", {r + 1, c + 1});
    }
    return e;
}

inline RawGrid parse_grid(const Json& doc, char name) {
    const std::string key(1, name);
    if (!doc.contains(key)) throw Error(ErrorCode::ParseError, "missing \"" + key + "\"");
    const Json& rows = doc.at(key);
    if (!rows.is_array() || rows.empty()) throw Error(ErrorCode::EmptyMatrix, key + " must be a non-empty array of rows");
    RawGrid grid;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Json& row = rows[r];
        if (!row.is_array()) throw Error(ErrorCode::ParseError, key + " row " + std::to_string(r + 1) + " is not an array");
        if (row.size() != rows[0].size())
            throw Error(ErrorCode::NotRectangular,
                        key + " row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                            " entries, expected " + std::to_string(rows[0].size()),
                        {r + 1});
        std::vector<RawEntry> entries;
        for (std::size_t c = 0; c < row.size(); ++c) entries.push_back(parse_entry(row[c], name, r, c));
        grid.push_back(std::move(entries));
    }
    if (grid.front().empty()) throw Error(ErrorCode::EmptyMatrix, key + " has empty rows");
    return grid;
}

template <ProbabilityScalar T>
Matrix<T> to_matrix(const RawGrid& grid, char name) {
    Matrix<T> m(grid.size(), grid.front().size());
    for (std::size_t r = 0; r < grid.size(); ++r)
        for (std::size_t c = 0; c < grid[r].size(); ++c) {
            if constexpr (ScalarTraits<T>::exact) {
                if (!grid[r][c].exact)
                    throw Error(ErrorCode::ParseError,
                                std::string(1, name) + " entry (" + std::to_string(r + 1) + ", " +
                                    std::to_string(c + 1) +
                                    ") is a floating point literal; exact mode needs a fraction string such as \"1/3\"",
                                {r + 1, c + 1});
                m(r, c) = *grid[r][c].exact;
            } else {
                m(r, c) = grid[r][c].approx;
            }
        }
    return m;
}

}  // namespace detail

/// Reads {"P": [[...]], "Q": [[...]]}; entries are JSON numbers or strings
/// such as "1/3", "2" or "0.25".
inline RawAssessment parse_raw_assessment(const Json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::ParseError, "expected a JSON object with keys \"P\" and \"Q\"");
    return {detail::parse_grid(doc, 'P'), detail::parse_grid(doc, 'Q')};
}

inline RawAssessment parse_raw_assessment(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
    }
    return parse_raw_assessment(doc);
}

template <ProbabilityScalar T>
Assessment<T> build_assessment(const RawAssessment& raw, const Tolerance& tol = {}) {
    auto p = make_stochastic(detail::to_matrix<T>(raw.p, 'P'), tol, "P");
    auto q = make_stochastic(detail::to_matrix<T>(raw.q, 'Q'), tol, "Q");
    return make_assessment(std::move(p), std::move(q));
}

inline Json scalar_json(const Rational& x) { return x.get_str(); }
inline Json scalar_json(double x) { return x; }

template <class T>
Json vector_json(const std::vector<T>& v) {
    Json out = Json::array();
    for (const auto& x : v) out.push_back(scalar_json(x));
    return out;
}

inline Json index_json(const std::vector<std::size_t>& v) {
    Json out = Json::array();
    for (std::size_t x : v) out.push_back(x + 1);
    return out;
}

template <class T>
Json matrix_json(const Matrix<T>& m) {
    Json out = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(scalar_json(m(r, c)));
        out.push_back(std::move(row));
    }
    return out;
}

template <class T>
Json assessment_json(const Assessment<T>& a) {
    return Json{{"P", matrix_json(a.P().matrix())}, {"Q", matrix_json(a.Q().matrix())}};
}

template <class T>
Json joint_json(const Joint<T>& j) {
    return Json{{"J", matrix_json(j.matrix())}};
}

inline Json block_json(const Block& b) { return Json{{"rows", index_json(b.rows)}, {"cols", index_json(b.cols)}}; }

inline Json pair_witness_json(const PairWitness& w) {
    return Json{{"kind", "pair"}, {"i", w.row + 1}, {"j", w.col + 1}};
}

template <class T>
Json cycle_witness_json(const CycleWitness<T>& w) {
    return Json{{"kind", "cycle"},
                {"i", index_json(w.cycle.rows)},
                {"j", index_json(w.cycle.cols)},
                {"lhs", scalar_json(w.lhs)},
                {"rhs", scalar_json(w.rhs)}};
}

template <class T>
Json report_json(const CoherenceReport<T>& r) {
    Json out;
    out["verdict"] = std::string(verdict_name(r.verdict));
    out["method"] = std::string(method_name(r.method));
    if (r.cycle_witness)
        out["witness"] = cycle_witness_json(*r.cycle_witness);
    else if (r.pair_witness)
        out["witness"] = pair_witness_json(*r.pair_witness);
    else
        out["witness"] = nullptr;
    if (r.property4) out["property4"] = Json{{"h0", r.property4->h0 + 1}, {"k0", r.property4->k0 + 1}};
    Json blocks = Json::array();
    for (const auto& b : r.blocks) {
        Json jb = block_json(b.block);
        jb["verdict"] = std::string(verdict_name(b.verdict));
        jb["gamma"] = b.gamma;
        jb["witness"] = b.witness ? pair_witness_json(*b.witness) : Json(nullptr);
        blocks.push_back(std::move(jb));
    }
    out["blocks"] = std::move(blocks);
    if (!r.detail.empty()) out["detail"] = r.detail;
    return out;
}

template <class T>
Json solution_json(const MarginalSolution<T>& s) {
    Json out;
    out["kind"] = std::string(kind_name(s.kind));
    out["method"] = s.method;
    out["f"] = vector_json(s.f);
    out["g"] = vector_json(s.g);
    out["weight_freedom"] = s.weight_freedom;
    out["weights"] = vector_json(s.weights);
    Json blocks = Json::array();
    for (const auto& b : s.blocks)
        blocks.push_back(Json{{"rows", index_json(b.rows)},
                              {"cols", index_json(b.cols)},
                              {"f", vector_json(b.f)},
                              {"g", vector_json(b.g)}});
    out["blocks"] = std::move(blocks);
    Json zero_blocks = Json::array();
    for (std::size_t k = 0; k < s.zero_weight_blocks.size(); ++k) {
        Json jb = block_json(s.zero_weight_blocks[k]);
        jb["witness"] = pair_witness_json(s.zero_weight_witnesses[k]);
        zero_blocks.push_back(std::move(jb));
    }
    out["zero_weight_blocks"] = std::move(zero_blocks);
    out["forced_zero"] = Json{{"rows", index_json(s.forced_zero_rows)}, {"cols", index_json(s.forced_zero_cols)}};
    Json warnings = Json::array();
    for (const auto& w : s.warnings) warnings.push_back(w);
    out["warnings"] = std::move(warnings);
    return out;
}

/// Parses "110;011" style masks: rows separated by ';', one 0/1 per column.
inline SupportMask parse_mask(const std::string& text) {
    std::vector<std::string> rows;
    std::string cur;
    for (char ch : text) {
        if (ch == ';') {
            rows.push_back(cur);
            cur.clear();
        } else if (ch == '0' || ch == '1') {
            cur.push_back(ch);
        } else if (ch != ' ') {
            throw Error(ErrorCode::BadMask, std::string("unexpected character '") + ch + "' in mask");
        }
    }
    rows.push_back(cur);
    if (rows.empty() || rows.front().empty()) throw Error(ErrorCode::BadMask, "empty mask");
    SupportMask mask(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size())
            throw Error(ErrorCode::BadMask, "mask row " + std::to_string(r + 1) + " has the wrong length", {r + 1});
        for (std::size_t c = 0; c < rows[r].size(); ++c) mask.set(r, c, rows[r][c] == '1');
    }
    return mask;
}

}  // namespace cohere::io
