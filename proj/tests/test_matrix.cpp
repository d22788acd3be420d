// Copyright (C) 2026 The cohere authors
// SPDX-License-Identifier: Apache-2.0
//

#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace cohere;
using namespace cohere::testing;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::ParseError;
}

}  // namespace

TEST(ParseRational, AcceptsFractionsIntegersAndDecimals) {
    EXPECT_EQ(*parse_rational("1/3"), Rational(1, 3));
    EXPECT_EQ(*parse_rational("2"), Rational(2));
    EXPECT_EQ(*parse_rational("0.25"), Rational(1, 4));
    EXPECT_EQ(*parse_rational("-3/6"), Rational(-1, 2));
    EXPECT_EQ(*parse_rational(" 4/8 "), Rational(1, 2));
    EXPECT_FALSE(parse_rational("1/0"));
    EXPECT_FALSE(parse_rational("abc"));
    EXPECT_FALSE(parse_rational(""));
    EXPECT_FALSE(parse_rational("1/"));
}

TEST(ScalarTraits, FloatComparisonIsRelative) {
    Tolerance tol;
    EXPECT_TRUE(nearly_equal(1.0, 1.0 + 1e-12, tol));
    EXPECT_FALSE(nearly_equal(1.0, 1.0 + 1e-6, tol));
    EXPECT_TRUE(nearly_equal(1e12, 1e12 + 1.0, tol));
    tol.zero_threshold = 1e-6;
    EXPECT_FALSE(is_positive(1e-7, tol));
    EXPECT_TRUE(is_positive(Rational(1, 1000000000), tol));
}

TEST(MakeStochastic, ExactRowSums) {
    EXPECT_NO_THROW(make_stochastic(rational_matrix({{"1", "0"}, {"1/2", "1/2"}})));
    EXPECT_NO_THROW(make_stochastic(rational_matrix({{"1", "0", "0"}, {"1/3", "1/3", "1/3"}, {"1/3", "1/3", "1/3"}})));
}

TEST(MakeStochastic, RowSumViolationReportsRow) {
    try {
        make_stochastic(double_matrix({{"0.6", "0.5"}}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RowSumViolation);
        EXPECT_EQ(e.where(), std::vector<std::size_t>{1});
        EXPECT_NE(std::string(e.what()).find("1.1"), std::string::npos);
    }
    EXPECT_EQ(code_of([] { make_stochastic(rational_matrix({{"1/3", "1/3"}})); }), ErrorCode::RowSumViolation);
}

TEST(MakeStochastic, RejectsNegativeAndEmpty) {
    EXPECT_EQ(code_of([] { make_stochastic(rational_matrix({{"3/2", "-1/2"}})); }), ErrorCode::NegativeEntry);
    EXPECT_EQ(code_of([] { make_stochastic(Matrix<Rational>(0, 0)); }), ErrorCode::EmptyMatrix);
    EXPECT_EQ(code_of([] { make_stochastic(std::vector<std::vector<double>>{}); }), ErrorCode::EmptyMatrix);
    EXPECT_EQ(code_of([] { make_stochastic(std::vector<std::vector<double>>{{1.0}, {0.5, 0.5}}); }),
              ErrorCode::NotRectangular);
}

TEST(MakeStochastic, FloatToleranceOnRowSums) {
    EXPECT_NO_THROW(make_stochastic(std::vector<std::vector<double>>{{0.1, 0.2, 0.7}}));
    Tolerance loose;
    loose.row_sum = 1e-3;
    EXPECT_NO_THROW(make_stochastic(std::vector<std::vector<double>>{{0.5, 0.5001}}, loose));
    EXPECT_THROW(make_stochastic(std::vector<std::vector<double>>{{0.5, 0.5001}}), Error);
}

TEST(MakeAssessment, GoldenPairIsAccepted) {
    const auto a = golden();
    EXPECT_EQ(a.rows(), 3u);
    EXPECT_EQ(a.cols(), 3u);
    EXPECT_EQ(a.q(1, 0), Rational(1, 4));
}

TEST(MakeAssessment, ShapeMismatch) {
    auto p = make_stochastic(rational_matrix({{"1", "0", "0"}, {"0", "1", "0"}}));
    auto qq = make_stochastic(rational_matrix({{"1", "0", "0"}, {"0", "1", "0"}}));
    EXPECT_EQ(code_of([&] { make_assessment(p, qq); }), ErrorCode::DimensionMismatch);
}

TEST(MakeAssessment, NormalizedJointPair) {
    const auto a = assessment({{"1/3", "2/3"}, {"3/7", "4/7"}}, {{"1/4", "3/4"}, {"1/3", "2/3"}});
    const auto from_joint = derive_assessment(joint({{"1/10", "2/10"}, {"3/10", "4/10"}}));
    EXPECT_EQ(a, from_joint);
}

TEST(Matrix, ProductAndTranspose) {
    const auto m = rational_matrix({{"1", "2"}, {"3", "4"}});
    const auto t = m.transpose();
    EXPECT_EQ(t(0, 1), Rational(3));
    const auto mm = m * t;
    EXPECT_EQ(mm(0, 0), Rational(5));
    EXPECT_EQ(mm(0, 1), Rational(11));
    EXPECT_EQ(mm(1, 1), Rational(25));
    EXPECT_THROW(Matrix<double>::from_rows({{1.0, 2.0}, {3.0}}), Error);
}

TEST(RestrictAssessment, BlockOfBlockDiagonal) {
    const auto a = block_diagonal(golden(), assessment({{"1"}}, {{"1"}}));
    const std::vector<std::size_t> rows{0, 1, 2}, cols{0, 1, 2};
    EXPECT_EQ(restrict_assessment(a, std::span<const std::size_t>(rows), std::span<const std::size_t>(cols)), golden());
}
