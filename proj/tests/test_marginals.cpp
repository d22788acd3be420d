// Copyright (C) 2026 The cohere authors
// SPDX-License-Identifier: Apache-2.0
//

#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace cohere;
using namespace cohere::testing;

namespace {

Assessment<Rational> identity2() { return assessment({{"1", "0"}, {"0", "1"}}, {{"1", "0"}, {"0", "1"}}); }

Assessment<Rational> positive2() { return derive_assessment(joint({{"1/10", "2/10"}, {"3/10", "4/10"}})); }

Assessment<Rational> path23() { return derive_assessment(joint({{"1/5", "1/5", "0"}, {"0", "3/10", "3/10"}})); }

Assessment<Rational> uniform23() {
    return assessment({{"1/3", "1/3", "1/3"}, {"1/3", "1/3", "1/3"}}, {{"1/2", "1/2"}, {"1/2", "1/2"}, {"1/2", "1/2"}});
}

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

TEST(MarginalsProperty4, Examples) {
    const auto gold = marginals_property4(golden(), Property4{0, 0});
    EXPECT_EQ(gold.f, qv({"1", "0", "0"}));
    EXPECT_EQ(gold.g, qv({"1", "0", "0"}));

    const auto uni = marginals_property4(uniform23(), Property4{0, 0});
    EXPECT_EQ(uni.f, qv({"1/2", "1/2"}));
    EXPECT_EQ(uni.g, qv({"1/3", "1/3", "1/3"}));

    const auto pos = marginals_property4(positive2(), Property4{0, 0});
    EXPECT_EQ(pos.f, qv({"3/10", "7/10"}));
    EXPECT_EQ(pos.g, qv({"2/5", "3/5"}));
}

TEST(MarginalsProperty4, IncompatibleThrows) {
    const auto a = perturb_p(positive2(), 0, 0, Rational(1, 20));
    EXPECT_EQ(code_of([&] { marginals_property4(a, Property4{0, 0}); }), ErrorCode::Condition4Violated);
}

TEST(MarginalsPositive, Examples) {
    // f_1 = (p11/q11 + p12/q21)^-1 = (4/3 + 2)^-1
    const auto pos = marginals_positive(positive2());
    EXPECT_EQ(pos.f[0], Rational(3, 10));
    EXPECT_EQ(pos.f, qv({"3/10", "7/10"}));
    EXPECT_EQ(pos.g, qv({"2/5", "3/5"}));

    for (std::size_t l = 1; l <= 4; ++l)
        for (std::size_t m = 1; m <= 4; ++m) {
            Matrix<Rational> p(l, m), qm(m, l);
            for (std::size_t i = 0; i < l; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    p(i, j) = Rational(1, static_cast<long>(m));
                    qm(j, i) = Rational(1, static_cast<long>(l));
                }
            const auto u = marginals_positive(make_assessment(make_stochastic(std::move(p)), make_stochastic(std::move(qm))));
            for (const auto& x : u.f) EXPECT_EQ(x, Rational(1, static_cast<long>(l)));
            for (const auto& x : u.g) EXPECT_EQ(x, Rational(1, static_cast<long>(m)));
        }
}

TEST(MarginalsPositive, RejectsZeros) {
    EXPECT_EQ(code_of([] { marginals_positive(path23()); }), ErrorCode::NotStrictlyPositive);
}

TEST(MarginalsConnected, Examples) {
    const auto path = path23();
    const auto m = marginals_connected(path, tz_for(path));
    EXPECT_EQ(m.f, qv({"2/5", "3/5"}));
    EXPECT_EQ(m.g, qv({"1/5", "1/2", "3/10"}));

    const auto pos = positive2();
    const auto mc = marginals_connected(pos, tz_for(pos));
    const auto mp = marginals_positive(pos);
    EXPECT_EQ(mc.f, mp.f);
    EXPECT_EQ(mc.g, mp.g);

    const auto one = assessment({{"1"}}, {{"1"}});
    EXPECT_EQ(marginals_connected(one, tz_for(one)).f, qv({"1"}));
}

TEST(MarginalsConnected, TreeChoiceDoesNotMatter) {
    const auto pos = derive_assessment(joint({{"1/10", "1/5", "1/20"}, {"3/20", "1/10", "2/5"}}));
    const std::vector<std::vector<Edge>> trees{
        {{0, 0}, {0, 1}, {0, 2}, {1, 0}},
        {{0, 0}, {1, 0}, {1, 1}, {1, 2}},
        {{0, 2}, {1, 2}, {1, 0}, {0, 1}},
    };
    const auto ref = marginals_positive(pos);
    for (const auto& tree : trees) {
        auto uv = build_uv(pos, std::span<const Edge>(tree));
        const auto tz = compute_tz(uv.u, uv.v);
        EXPECT_FALSE(check_condition6(pos, tz));
        const auto m = marginals_connected(pos, tz);
        EXPECT_EQ(m.f, ref.f);
        EXPECT_EQ(m.g, ref.g);
    }
    const auto bad = perturb_p(pos, 0, 1, Rational(1, 20));
    for (const auto& tree : trees) {
        auto uv = build_uv(bad, std::span<const Edge>(tree));
        EXPECT_TRUE(check_condition6(bad, compute_tz(uv.u, uv.v)));
    }
}

TEST(MarginalsBlocks, IdentityFamily) {
    const auto sol = solve_system3(identity2());
    ASSERT_EQ(sol.blocks.size(), 2u);
    for (const char* theta : {"0", "1/4", "1/2", "1"}) {
        const std::vector<Rational> w{q(theta), 1 - q(theta)};
        const auto m = materialize(sol, std::span<const Rational>(w));
        EXPECT_EQ(m.f, w);
        EXPECT_EQ(m.g, w);
    }
}

TEST(MarginalsBlocks, TwoPathCopies) {
    const auto path = path23();
    const auto m = marginals_connected(path, tz_for(path));
    MarginalBlock<Rational> first{{0, 1}, {0, 1, 2}, m.f, m.g};
    MarginalBlock<Rational> second{{2, 3}, {3, 4, 5}, m.f, m.g};
    const auto sol = marginals_blocks<Rational>({first, second}, qv({"1/2", "1/2"}));
    EXPECT_EQ(sol.kind, SolutionKind::family);
    EXPECT_EQ(sol.weight_freedom, 1u);
    EXPECT_EQ(sol.f, qv({"1/5", "3/10", "1/5", "3/10"}));
    EXPECT_TRUE(oracle_solves(block_diagonal(path, path), sol.f, sol.g));
}

TEST(MarginalsBlocks, SingleBlockIsUnique) {
    const auto m = marginals_positive(positive2());
    const auto sol = marginals_blocks<Rational>({MarginalBlock<Rational>{{0, 1}, {0, 1}, m.f, m.g}});
    EXPECT_EQ(sol.kind, SolutionKind::unique);
    EXPECT_EQ(sol.weight_freedom, 0u);
}

TEST(MarginalsBlocks, BadWeights) {
    const auto sol = solve_system3(identity2());
    const auto neg = qv({"3/2", "-1/2"});
    const auto short_sum = qv({"1/2", "1/4"});
    EXPECT_EQ(code_of([&] { materialize(sol, std::span<const Rational>(neg)); }), ErrorCode::WeightSumViolation);
    EXPECT_EQ(code_of([&] { materialize(sol, std::span<const Rational>(short_sum)); }), ErrorCode::WeightSumViolation);
}

TEST(SolveSystem3, GoldenNeedsOptIn) {
    EXPECT_EQ(code_of([] { solve_system3(golden()); }), ErrorCode::IncoherentAssessment);
    SolveConfig cfg;
    cfg.allow_incoherent = true;
    const auto sol = solve_system3(golden(), cfg);
    EXPECT_EQ(sol.kind, SolutionKind::unique);
    EXPECT_EQ(sol.f, qv({"1", "0", "0"}));
    EXPECT_EQ(sol.g, qv({"1", "0", "0"}));
    ASSERT_EQ(sol.warnings.size(), 1u);
    EXPECT_EQ(sol.warnings[0], "incoherent assessment");
}

TEST(SolveSystem3, IdentityIsFamily) {
    const auto sol = solve_system3(identity2());
    EXPECT_EQ(sol.kind, SolutionKind::family);
    EXPECT_EQ(sol.blocks.size(), 2u);
}

TEST(SolveSystem3, EditedGoldenRow) {
    // q_21 raised to 1/3 (row renormalized); compared with an exhaustive
    // feasibility search over the supports of f and g.
    const auto a = assessment({{"1", "0", "0"}, {"1/3", "1/3", "1/3"}, {"1/3", "1/3", "1/3"}},
                              {{"1", "0", "0"}, {"1/3", "1/2", "1/6"}, {"1/4", "1/4", "1/2"}});
    SolveConfig cfg;
    cfg.allow_incoherent = true;
    const auto sol = solve_system3(a, cfg);
    ASSERT_NE(sol.kind, SolutionKind::infeasible);
    EXPECT_TRUE(oracle_solves(a, sol.f, sol.g));
    EXPECT_EQ(sol.f, qv({"1", "0", "0"}));
}

TEST(SolveSystem3, InfeasibleWhenNoComponentBalances) {
    const auto bad = assessment({{"1/2", "1/2"}, {"1/2", "1/2"}}, {{"1/3", "2/3"}, {"2/3", "1/3"}});
    SolveConfig cfg;
    cfg.allow_incoherent = true;
    const auto sol = solve_system3(bad, cfg);
    EXPECT_EQ(sol.kind, SolutionKind::infeasible);
    EXPECT_EQ(code_of([&] { solve_marginals(bad, cfg); }), ErrorCode::Infeasible);
}

TEST(SolveMarginals, Routes) {
    EXPECT_EQ(code_of([] { solve_marginals(golden()); }), ErrorCode::IncoherentAssessment);
    SolveConfig lenient;
    lenient.allow_incoherent = true;
    const auto gold = solve_marginals(golden(), lenient);
    EXPECT_EQ(gold.f, qv({"1", "0", "0"}));
    EXPECT_FALSE(gold.warnings.empty());

    const auto pos = solve_marginals(positive2());
    EXPECT_EQ(pos.method, "positive-closed-form");
    EXPECT_EQ(pos.f, qv({"3/10", "7/10"}));

    const auto path = solve_marginals(path23());
    EXPECT_EQ(path.method, "TZ-closed-form");
    EXPECT_TRUE(path.unique());
    EXPECT_EQ(path.g, qv({"1/5", "1/2", "3/10"}));

    const auto id = solve_marginals(identity2());
    EXPECT_EQ(id.kind, SolutionKind::family);
    EXPECT_EQ(id.weight_freedom, 1u);

    const auto prop = assessment({{"1", "0", "0"}, {"1/3", "1/3", "1/3"}, {"1/3", "1/3", "1/3"}},
                                 {{"1", "0", "0"}, {"1/4", "3/8", "3/8"}, {"1/4", "3/8", "3/8"}});
    const auto p4 = solve_marginals(prop);
    EXPECT_EQ(p4.method, "property4-closed-form");
    EXPECT_EQ(p4.f, qv({"1", "0", "0"}));
}

TEST(SolveMarginals, FloatPath) {
    const auto a = derive_assessment(joint<double>({{"0.1", "0.2"}, {"0.3", "0.4"}}));
    const auto sol = solve_marginals(a);
    EXPECT_NEAR(sol.f[0], 0.3, 1e-12);
    EXPECT_NEAR(sol.g[1], 0.6, 1e-12);
}
