// Copyright (C) 2026 The cohere authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cohere {

enum class ErrorCode {
    EmptyMatrix,
    NotRectangular,
    NegativeEntry,
    RowSumViolation,
    DimensionMismatch,
    IndexOutOfRange,
    InvalidCycle,
    NoBothPositiveTree,
    Property4NotSatisfied,
    GammaBoundExceeded,
    Condition4Violated,
    Condition6Violated,
    NotStrictlyPositive,
    WeightSumViolation,
    IncoherentAssessment,
    Undecided,
    Infeasible,
    BadMask,
    InvalidJoint,
    ParseError,
};

constexpr std::string_view error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyMatrix: return "EmptyMatrix";
        case ErrorCode::NotRectangular: return "NotRectangular";
        case ErrorCode::NegativeEntry: return "NegativeEntry";
        case ErrorCode::RowSumViolation: return "RowSumViolation";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::InvalidCycle: return "InvalidCycle";
        case ErrorCode::NoBothPositiveTree: return "NoBothPositiveTree";
        case ErrorCode::Property4NotSatisfied: return "Property4NotSatisfied";
        case ErrorCode::GammaBoundExceeded: return "GammaBoundExceeded";
        case ErrorCode::Condition4Violated: return "Condition4Violated";
        case ErrorCode::Condition6Violated: return "Condition6Violated";
        case ErrorCode::NotStrictlyPositive: return "NotStrictlyPositive";
        case ErrorCode::WeightSumViolation: return "WeightSumViolation";
        case ErrorCode::IncoherentAssessment: return "IncoherentAssessment";
        case ErrorCode::Undecided: return "Undecided";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::BadMask: return "BadMask";
        case ErrorCode::InvalidJoint: return "InvalidJoint";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// Every failure raised by the library. `where` carries the 1-based
/// indices the message refers to (row, column, ...), when there are any.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::vector<std::size_t> where = {})
        : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code), where_(std::move(where)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::vector<std::size_t>& where() const noexcept { return where_; }

private:
    ErrorCode code_;
    std::vector<std::size_t> where_;
};

}  // namespace cohere
