// Copyright (C) 2026 The cohere authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "cohere/cohere.hpp"
#include "cohere/io.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

namespace cohere::cli {

/// Process exit codes; stable contract.
enum ExitCode : int {
    kSuccess = 0,
    kIncoherent = 1,
    kInputError = 2,
    kUndecided = 3,
    kInfeasible = 4,
    kInternalError = 5,
};

enum class Arithmetic { automatic, rational, floating };

struct RunConfig {
    Tolerance tolerance;
    BruteForceLimits brute_force;
    bool exact = false;
    bool force_float = false;
    bool allow_incoherent = false;
    std::string format = "json";
    std::string input = "-";

    // oracle
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::uint64_t seed = 0;
    std::string mask;
    std::string output = "oracle";

    SolveConfig solve() const { return {tolerance, brute_force, allow_incoherent}; }
    CheckConfig check() const { return {tolerance, brute_force}; }
};

namespace detail {

inline constexpr std::size_t kAutoExactCells = 64;

inline int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::IncoherentAssessment: return kIncoherent;
        case ErrorCode::Undecided: return kUndecided;
        case ErrorCode::Infeasible: return kInfeasible;
        case ErrorCode::EmptyMatrix:
        case ErrorCode::NotRectangular:
        case ErrorCode::NegativeEntry:
        case ErrorCode::RowSumViolation:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::BadMask:
        case ErrorCode::InvalidJoint:
        case ErrorCode::ParseError: return kInputError;
        default: return kInternalError;
    }
}

inline std::string read_input(const std::string& path, std::istream& in) {
    if (path == "-") return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    std::ifstream file(path);
    if (!file) throw Error(ErrorCode::ParseError, "cannot open " + path);
    return {std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
}

inline Arithmetic resolve_arithmetic(const RunConfig& cfg, const io::RawAssessment& raw) {
    if (cfg.exact) return Arithmetic::rational;
    if (cfg.force_float) return Arithmetic::floating;
    if (raw.first_inexact() || raw.rows() * raw.cols() > kAutoExactCells) return Arithmetic::floating;
    return Arithmetic::rational;
}

template <class T>
std::string join_scalars(const std::vector<T>& v) {
    std::string s = "(";
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + to_string(v[k]);
    return s + ")";
}

inline std::string join_indices(const std::vector<std::size_t>& v) {
    std::string s = "(";
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k] + 1);
    return s + ")";
}

template <ProbabilityScalar T>
int validate(const Assessment<T>& a, const RunConfig& cfg, std::ostream& out) {
    const auto& tol = cfg.tolerance;
    const auto p4 = find_property4(a, tol);
    const bool p6 = has_property6(a, tol);
    const bool p_conn = is_connected(a.P(), tol);
    const bool q_conn = is_connected(a.Q(), tol);
    const auto blocks = connected_components(support_graph(a, tol));
    if (cfg.format == "text") {
        out << "valid " << a.rows() << "x" << a.cols() << " assessment (" << ScalarTraits<T>::name << ")\n";
        out << "property 4: ";
        if (p4)
            out << "h0=" << p4->h0 + 1 << " k0=" << p4->k0 + 1 << "\n";
        else
            out << "no\n";
        out << "property 6: " << (p6 ? "yes" : "no") << "\n";
        out << "connected: P " << (p_conn ? "yes" : "no") << ", Q " << (q_conn ? "yes" : "no") << "\n";
        out << "blocks: " << blocks.size() << "\n";
        for (const auto& b : blocks.blocks) out << "  rows " << join_indices(b.rows) << " cols " << join_indices(b.cols) << "\n";
        return kSuccess;
    }
    io::Json doc;
    doc["valid"] = true;
    doc["arithmetic"] = ScalarTraits<T>::name;
    doc["rows"] = a.rows();
    doc["cols"] = a.cols();
    doc["property4"] = p4 ? io::Json{{"h0", p4->h0 + 1}, {"k0", p4->k0 + 1}} : io::Json(nullptr);
    doc["property6"] = p6;
    doc["strictly_positive"] = is_strictly_positive(a, tol);
    doc["connected"] = io::Json{{"P", p_conn}, {"Q", q_conn}};
    io::Json jb = io::Json::array();
    for (const auto& b : blocks.blocks) jb.push_back(io::block_json(b));
    doc["block_count"] = blocks.size();
    doc["blocks"] = std::move(jb);
    out << doc.dump(2) << "\n";
    return kSuccess;
}

template <ProbabilityScalar T>
int check(const Assessment<T>& a, const RunConfig& cfg, std::ostream& out) {
    const auto rep = check_coherence(a, cfg.check());
    if (cfg.format == "text") {
        out << "verdict: " << verdict_name(rep.verdict) << " (" << method_name(rep.method) << ")\n";
        if (rep.cycle_witness) {
            const auto& w = *rep.cycle_witness;
            out << "witness cycle i=" << join_indices(w.cycle.rows) << " j=" << join_indices(w.cycle.cols)
                << ": lhs " << to_string(w.lhs) << " != rhs " << to_string(w.rhs) << "\n";
        } else if (rep.pair_witness) {
            out << "witness pair (" << rep.pair_witness->row + 1 << ", " << rep.pair_witness->col + 1 << ")\n";
        }
        for (const auto& b : rep.blocks)
            out << "  block rows " << join_indices(b.block.rows) << " cols " << join_indices(b.block.cols) << ": "
                << verdict_name(b.verdict) << ", gamma " << b.gamma << "\n";
        if (!rep.detail.empty()) out << rep.detail << "\n";
    } else {
        io::Json doc = io::report_json(rep);
        doc["arithmetic"] = ScalarTraits<T>::name;
        out << doc.dump(2) << "\n";
    }
    switch (rep.verdict) {
        case Verdict::coherent: return kSuccess;
        case Verdict::incoherent: return kIncoherent;
        case Verdict::undecided: return kUndecided;
    }
    return kInternalError;
}

template <ProbabilityScalar T>
int marginals(const Assessment<T>& a, const RunConfig& cfg, std::ostream& out) {
    const auto sol = solve_marginals(a, cfg.solve());
    if (cfg.format == "text") {
        out << "kind: " << kind_name(sol.kind) << " (" << sol.method << ")\n";
        out << "f = " << join_scalars(sol.f) << "\n";
        out << "g = " << join_scalars(sol.g) << "\n";
        if (sol.weight_freedom > 0) {
            out << "weight freedom: " << sol.weight_freedom << ", materialized with weights " << join_scalars(sol.weights)
                << "\n";
            for (const auto& b : sol.blocks)
                out << "  block rows " << join_indices(b.rows) << " cols " << join_indices(b.cols) << ": f "
                    << join_scalars(b.f) << " g " << join_scalars(b.g) << "\n";
        }
        for (const auto& w : sol.warnings) out << "warning: " << w << "\n";
    } else {
        io::Json doc = io::solution_json(sol);
        doc["arithmetic"] = ScalarTraits<T>::name;
        out << doc.dump(2) << "\n";
    }
    return kSuccess;
}

template <ProbabilityScalar T>
int oracle(const RunConfig& cfg, std::ostream& out) {
    std::optional<SupportMask> mask;
    if (!cfg.mask.empty()) mask = io::parse_mask(cfg.mask);
    const auto joint = random_joint<T>(cfg.rows, cfg.cols, cfg.seed, mask);
    const auto a = derive_assessment(joint, cfg.tolerance);
    const std::string joint_path = cfg.output + ".joint.json";
    const std::string assessment_path = cfg.output + ".json";
    {
        std::ofstream f(joint_path);
        if (!f) throw Error(ErrorCode::ParseError, "cannot write " + joint_path);
        f << io::joint_json(joint).dump(2) << "\n";
    }
    {
        std::ofstream f(assessment_path);
        if (!f) throw Error(ErrorCode::ParseError, "cannot write " + assessment_path);
        f << io::assessment_json(a).dump(2) << "\n";
    }
    if (cfg.format == "text") {
        out << "wrote " << joint_path << " and " << assessment_path << "\n";
    } else {
        io::Json doc;
        doc["rows"] = cfg.rows;
        doc["cols"] = cfg.cols;
        doc["seed"] = cfg.seed;
        doc["arithmetic"] = ScalarTraits<T>::name;
        doc["joint"] = joint_path;
        doc["assessment"] = assessment_path;
        out << doc.dump(2) << "\n";
    }
    return kSuccess;
}

template <class Fn>
int with_assessment(const RunConfig& cfg, std::istream& in, Fn&& fn) {
    const auto raw = io::parse_raw_assessment(read_input(cfg.input, in));
    if (resolve_arithmetic(cfg, raw) == Arithmetic::rational)
        return fn(io::build_assessment<Rational>(raw, cfg.tolerance));
    return fn(io::build_assessment<double>(raw, cfg.tolerance));
}

inline void report_error(const Error& e, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    err << "error: " << e.what() << "\n";
    if (cfg.format == "json") {
        io::Json where = io::Json::array();
        for (std::size_t w : e.where()) where.push_back(w);
        io::Json doc;
        doc["error"] = io::Json{{"code", std::string(error_name(e.code()))}, {"message", e.what()}, {"where", where}};
        out << doc.dump(2) << "\n";
    }
}

}  // namespace detail

/// Runs the command line `args` (without the program name).
inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Coherence checks and marginal reconstruction for pairs of conditional probability tables"};
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--tolerance", cfg.tolerance.epsilon, "relative tolerance for float comparisons")
        ->check(CLI::PositiveNumber);
    app.add_option("--zero-threshold", cfg.tolerance.zero_threshold, "float entries at or below this count as zero")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--exact", cfg.exact, "exact rational arithmetic (needs fraction strings)");
    app.add_flag("--float", cfg.force_float, "binary floating point arithmetic");
    app.add_option("--max-bruteforce-cells", cfg.brute_force.max_cells, "largest l*m for cycle enumeration")
        ->check(CLI::PositiveNumber);
    app.add_option("--max-bruteforce-order", cfg.brute_force.max_order, "largest min(l, m) for cycle enumeration")
        ->check(CLI::PositiveNumber);
    app.add_flag("--allow-incoherent", cfg.allow_incoherent, "solve the marginal system even when incoherent");
    app.add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"json", "text"}));

    auto* validate_cmd = app.add_subcommand("validate", "check the input and report its structure");
    auto* check_cmd = app.add_subcommand("check", "decide coherence");
    auto* marginals_cmd = app.add_subcommand("marginals", "reconstruct the marginal distributions");
    for (auto* sub : {validate_cmd, check_cmd, marginals_cmd})
        sub->add_option("input", cfg.input, "assessment JSON file, '-' for standard input");

    auto* oracle_cmd = app.add_subcommand("oracle", "write a random joint and its derived assessment");
    oracle_cmd->add_option("--rows", cfg.rows, "number of rows l")->required()->check(CLI::PositiveNumber);
    oracle_cmd->add_option("--cols", cfg.cols, "number of columns m")->required()->check(CLI::PositiveNumber);
    oracle_cmd->add_option("--seed", cfg.seed, "generator seed");
    oracle_cmd->add_option("--mask", cfg.mask, "support mask, rows separated by ';', e.g. 110;011");
    oracle_cmd->add_option("-o,--output", cfg.output, "output prefix");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    if (cfg.exact && cfg.force_float) {
        err << "error: --exact and --float are mutually exclusive\n";
        return kInputError;
    }
    cfg.tolerance.row_sum = cfg.tolerance.epsilon;

    try {
        if (*validate_cmd) return detail::with_assessment(cfg, in, [&](const auto& a) { return detail::validate(a, cfg, out); });
        if (*check_cmd) return detail::with_assessment(cfg, in, [&](const auto& a) { return detail::check(a, cfg, out); });
        if (*marginals_cmd)
            return detail::with_assessment(cfg, in, [&](const auto& a) { return detail::marginals(a, cfg, out); });
        if (*oracle_cmd) {
            if (!cfg.force_float && (cfg.exact || cfg.rows * cfg.cols <= detail::kAutoExactCells))
                return detail::oracle<Rational>(cfg, out);
            return detail::oracle<double>(cfg, out);
        }
    } catch (const Error& e) {
        detail::report_error(e, cfg, out, err);
        return detail::exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInternalError;
    }
    return kInternalError;
}

}  // namespace cohere::cli
