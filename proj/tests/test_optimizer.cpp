/*
 * Copyright 2026 The HMTML Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "hmtml/error.hpp"
#include "hmtml/optimizer.hpp"
#include "oracles.hpp"

using namespace hmtml;
using hmtml::testing::RandomInstance;
using hmtml::testing::Rng;

namespace {

RandomInstance small_instance(Rng& rng, int m = 3, int max_dim = 4, int max_rank = 2, int max_tasks = 3) {
    std::vector<Eigen::Index> dims;
    for (int k = 0; k < m; ++k) dims.push_back(rng.integer(2, max_dim));
    return hmtml::testing::random_instance(rng, dims, rng.integer(1, max_rank), rng.integer(1, max_tasks), 4, 8);
}

HmtmlConfig config_with(double gamma, double gamma_m) {
    HmtmlConfig c;
    c.gamma = gamma;
    c.gamma_m = gamma_m;
    return c;
}

void check_monotone(const std::vector<double>& trace) {
    for (std::size_t k = 1; k < trace.size(); ++k) EXPECT_LE(trace[k], trace[k - 1] + 1e-10) << "sweep " << k;
}

}  // namespace

TEST(SmoothedL1, Branches) {
    const double s = 0.5;
    auto one = [](double v) { return Eigen::MatrixXd::Constant(1, 1, v); };
    EXPECT_DOUBLE_EQ(smoothed_l1(one(0.25), s), 0.0625);
    EXPECT_DOUBLE_EQ(smoothed_l1_grad(one(0.25), s)(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(smoothed_l1(one(1.0), s), 0.75);
    EXPECT_DOUBLE_EQ(smoothed_l1_grad(one(1.0), s)(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(smoothed_l1(one(-0.8), s), 0.55);
    EXPECT_DOUBLE_EQ(smoothed_l1_grad(one(-0.8), s)(0, 0), -1.0);
    // Continuous at the breakpoints.
    EXPECT_DOUBLE_EQ(smoothed_l1(one(s), s), s / 2);
    EXPECT_DOUBLE_EQ(smoothed_l1_grad(one(-s), s)(0, 0), -1.0);
    EXPECT_EQ(smoothed_l1(one(0.0), s), 0.0);
}

TEST(SmoothedL1, SumsEntries) {
    Rng rng(1);
    const Eigen::MatrixXd u = rng.matrix(4, 3, -2, 2);
    EXPECT_NEAR(smoothed_l1(u, 0.3), hmtml::testing::huber_l1(u, 0.3), 1e-14);
    EXPECT_THROW(smoothed_l1(u, 0.0), InvalidInput);
}

TEST(GramOther, IdentityFactors) {
    std::vector<FactorMatrix> us(3, Eigen::MatrixXd::Identity(3, 3));
    us[0] = Eigen::MatrixXd::Ones(5, 3);
    EXPECT_EQ(gram_other(us, 0), Eigen::MatrixXd::Identity(3, 3));
}

TEST(GramOther, RankOneCollapse) {
    Rng rng(2);
    std::vector<FactorMatrix> us{rng.matrix(3, 1), rng.matrix(4, 1), rng.matrix(2, 1)};
    EXPECT_NEAR(gram_other(us, 0)(0, 0), us[1].squaredNorm() * us[2].squaredNorm(), 1e-14);
}

TEST(GramOther, MatchesDenseOracle) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = rng.integer(2, 4);
        const int r = rng.integer(1, 3);
        std::vector<FactorMatrix> us;
        for (int k = 0; k < m; ++k) us.push_back(rng.matrix(rng.integer(1, 4), r));
        for (int mode = 0; mode < m; ++mode) {
            const Eigen::MatrixXd b = matricize(hmtml::testing::core_without(us, mode), mode).matrix;
            EXPECT_LE(hmtml::testing::max_abs(gram_other(us, mode) - b * b.transpose()), 1e-10);
        }
    }
}

TEST(CrossTerm, ZeroOtherFactor) {
    Rng rng(4);
    std::vector<FactorMatrix> us{rng.matrix(3, 2), Eigen::MatrixXd::Zero(2, 2), rng.matrix(4, 2)};
    std::vector<Eigen::MatrixXd> ws{rng.matrix(3, 3), rng.matrix(2, 3), rng.matrix(4, 3)};
    EXPECT_EQ(cross_term(us, ws, 0), Eigen::MatrixXd::Zero(3, 2));
}

TEST(CrossTerm, HandCase) {
    std::vector<FactorMatrix> us{Eigen::Vector2d(1, 1), Eigen::Vector2d(2, -1)};
    std::vector<Eigen::MatrixXd> ws{Eigen::Vector2d(0.6, 0.8), Eigen::Vector2d(1, 0)};
    // w_1 * (U_2^T w_2) = (0.6, 0.8) * 2.
    const Eigen::MatrixXd c = cross_term(us, ws, 0);
    EXPECT_NEAR(c(0, 0), 1.2, 1e-15);
    EXPECT_NEAR(c(1, 0), 1.6, 1e-15);
}

TEST(CrossTerm, MatchesDenseOracle) {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        RandomInstance inst = small_instance(rng, rng.integer(2, 4));
        const auto& ws = inst.problem.weights;
        for (std::size_t mode = 0; mode < ws.size(); ++mode) {
            const Eigen::MatrixXd b = matricize(hmtml::testing::core_without(inst.factors, mode), mode).matrix;
            Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(ws[mode].rows(), b.rows());
            for (Eigen::Index p = 0; p < ws.front().cols(); ++p)
                expected += matricize(hmtml::testing::weight_tensor(ws, p), mode).matrix * b.transpose();
            EXPECT_LE(hmtml::testing::max_abs(cross_term(inst.factors, ws, mode) - expected), 1e-10);
        }
    }
}

TEST(CouplingTerm, MatchesDenseOracle) {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        RandomInstance inst = small_instance(rng, rng.integer(2, 4));
        EXPECT_NEAR(coupling_term(inst.factors, inst.problem.weights),
                    hmtml::testing::dense_coupling(inst.factors, inst.problem.weights), 1e-10);
    }
}

TEST(Objective, ZeroFactorsGiveGamma) {
    Rng rng(7);
    RandomInstance inst = small_instance(rng);
    for (auto& u : inst.factors) u.setZero();
    HmtmlConfig cfg = config_with(2.5, 0.3);
    cfg.ablation.drop_loss = true;
    EXPECT_NEAR(objective(inst.factors, inst.problem, cfg), 2.5, 1e-12);

    cfg.ablation.drop_reg = true;
    cfg.gamma = 0.0;
    EXPECT_EQ(objective(inst.factors, inst.problem, cfg), 0.0);
}

TEST(Objective, MatchesDenseOracleWithAblations) {
    Rng rng(8);
    for (int trial = 0; trial < 40; ++trial) {
        RandomInstance inst = small_instance(rng);
        HmtmlConfig cfg = config_with(rng.uniform(0.1, 3.0), rng.uniform(0.0, 1.0));
        cfg.ablation.drop_loss = trial % 5 == 1;
        cfg.ablation.drop_reg = trial % 5 == 2;
        cfg.ablation.frobenius_reg = trial % 5 == 3;
        EXPECT_NEAR(objective(inst.factors, inst.problem, cfg),
                    hmtml::testing::dense_objective(inst.factors, inst.problem, cfg), 1e-10);
    }
}

TEST(Objective, RejectsMismatch) {
    Rng rng(9);
    RandomInstance inst = small_instance(rng);
    const HmtmlConfig cfg;
    auto factors = inst.factors;
    factors.pop_back();
    EXPECT_THROW(objective(factors, inst.problem, cfg), InvalidInput);
    factors = inst.factors;
    factors[0] = Eigen::MatrixXd::Zero(factors[0].rows() + 1, factors[0].cols());
    EXPECT_THROW(objective(factors, inst.problem, cfg), InvalidInput);
}

TEST(Gradient, ReducesToLossGradient) {
    Rng rng(10);
    RandomInstance inst = small_instance(rng);
    const HmtmlConfig cfg = config_with(0.0, 0.0);
    for (std::size_t m = 0; m < inst.factors.size(); ++m)
        EXPECT_EQ(gradient_Um(inst.factors, inst.problem, cfg, m),
                  loss_gradient(inst.factors[m], inst.problem.pairs[m], cfg.rho));
}

TEST(Gradient, TwoDomainHandCase) {
    Rng rng(11);
    RandomInstance inst = hmtml::testing::random_instance(rng, {2, 3}, 1, 1, 4, 4);
    HmtmlConfig cfg = config_with(1.7, 0.0);
    cfg.ablation.drop_loss = true;
    const auto& u = inst.factors;
    const auto& w = inst.problem.weights;
    const Eigen::MatrixXd expected =
        2.0 * cfg.gamma * (u[0] * u[1].squaredNorm() - w[0] * (w[1].col(0).dot(u[1].col(0))));
    EXPECT_LE(hmtml::testing::max_abs(gradient_Um(u, inst.problem, cfg, 0) - expected), 1e-12);
}

TEST(Gradient, MatchesDenseOracle) {
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        RandomInstance inst = small_instance(rng);
        HmtmlConfig cfg = config_with(rng.uniform(0.1, 3.0), rng.uniform(0.0, 1.0));
        cfg.ablation.frobenius_reg = trial % 4 == 3;
        for (std::size_t m = 0; m < inst.factors.size(); ++m)
            EXPECT_LE(hmtml::testing::max_abs(gradient_Um(inst.factors, inst.problem, cfg, m) -
                                              hmtml::testing::dense_gradient(inst.factors, inst.problem, cfg, m)),
                      1e-10);
    }
}

TEST(Gradient, MatchesFiniteDifferencesIncludingBreakpoints) {
    Rng rng(13);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<Eigen::Index> dims;
        for (int k = 0; k < 3; ++k) dims.push_back(rng.integer(4, 8));
        RandomInstance inst = hmtml::testing::random_instance(rng, dims, rng.integer(1, 3), rng.integer(2, 5), 4, 10);
        HmtmlConfig cfg = config_with(rng.uniform(0.1, 2.0), rng.uniform(0.01, 1.0));
        // Pin some entries onto the smoothing breakpoints.
        for (auto& u : inst.factors)
            for (Eigen::Index i = 0; i < u.size(); i += 3) u.data()[i] = (i / 3) % 2 ? cfg.sigma : 0.0;
        for (std::size_t m = 0; m < 3; ++m) {
            auto probe = inst.factors;
            const Eigen::MatrixXd fd = hmtml::testing::finite_difference(
                [&](const Eigen::MatrixXd& x) {
                    probe[m] = x;
                    return objective(probe, inst.problem, cfg);
                },
                inst.factors[m]);
            EXPECT_LE(hmtml::testing::relative_error(gradient_Um(inst.factors, inst.problem, cfg, m), fd), 1e-5)
                << "trial " << trial << " mode " << m;
        }
    }
}

TEST(Subproblem, ValueTracksObjectiveDifferences) {
    Rng rng(14);
    RandomInstance inst = small_instance(rng);
    const HmtmlConfig cfg = config_with(0.8, 0.2);
    Subproblem sub(inst.factors, inst.problem, cfg, 1);
    auto moved = inst.factors;
    moved[1] = rng.matrix(moved[1].rows(), moved[1].cols(), 0, 1);
    EXPECT_NEAR(sub.value(moved[1]) - sub.value(inst.factors[1]),
                objective(moved, inst.problem, cfg) - objective(inst.factors, inst.problem, cfg), 1e-10);
}

TEST(SolveSubproblem, StationaryStartReturnsImmediately) {
    Rng rng(15);
    RandomInstance inst = small_instance(rng);
    for (std::size_t m = 1; m < inst.factors.size(); ++m) inst.factors[m].setZero();
    HmtmlConfig cfg = config_with(1.0, 0.0);
    cfg.ablation.drop_loss = true;
    Subproblem sub(inst.factors, inst.problem, cfg, 0);
    const SubproblemResult res = solve_subproblem(sub, inst.factors[0], cfg);
    EXPECT_EQ(res.steps, 0);
    EXPECT_EQ(res.factor, inst.factors[0]);
    EXPECT_EQ(res.trace.size(), 1u);
}

TEST(SolveSubproblem, ScalarQuadraticMinimizer) {
    // d = r = P = 1, M = 2: F(u) = gamma (w1 w2 - u a)^2, minimized at u = w1 w2 / a.
    HmtmlProblem problem;
    DomainData d;
    d.samples = Eigen::MatrixXd(2, 1);
    d.samples << 0.0, 1.0;
    d.labels = {0, 1};
    d.num_classes = 2;
    problem.pairs = {generate_pairs(d), generate_pairs(d)};
    problem.weights = {Eigen::MatrixXd::Constant(1, 1, 0.9), Eigen::MatrixXd::Constant(1, 1, 0.7)};
    std::vector<FactorMatrix> us{Eigen::MatrixXd::Constant(1, 1, 0.1), Eigen::MatrixXd::Constant(1, 1, 0.5)};
    HmtmlConfig cfg = config_with(1.0, 0.0);
    cfg.ablation.drop_loss = true;
    cfg.inner_tolerance = 1e-12;
    cfg.max_inner = 1000;
    Subproblem sub(us, problem, cfg, 0);
    const SubproblemResult res = solve_subproblem(sub, us[0], cfg);
    EXPECT_NEAR(res.factor(0, 0), 0.9 * 0.7 / 0.5, 1e-6);
}

TEST(SolveSubproblem, AcceptedStepsSatisfySufficientDecrease) {
    Rng rng(16);
    for (int trial = 0; trial < 10; ++trial) {
        RandomInstance inst = small_instance(rng);
        const HmtmlConfig cfg = config_with(0.5, 0.05);
        Subproblem sub(inst.factors, inst.problem, cfg, 0);
        const SubproblemResult res = solve_subproblem(sub, inst.factors[0], cfg);
        ASSERT_EQ(res.trace.size(), static_cast<std::size_t>(res.steps) + 1);
        for (std::size_t t = 1; t < res.trace.size(); ++t) EXPECT_LE(res.trace[t], res.trace[t - 1]);
        EXPECT_TRUE((res.factor.array() >= 0.0).all());
        EXPECT_LE(res.max_checks, cfg.max_step_checks);
        EXPECT_LE(res.steps, cfg.max_inner);
    }
}

TEST(SolveSubproblem, DivergenceCarriesTrace) {
    Rng rng(17);
    RandomInstance inst = small_instance(rng);
    inst.problem.pairs[0].diffs *= 1e200;
    const HmtmlConfig cfg;
    Subproblem sub(inst.factors, inst.problem, cfg, 0);
    try {
        solve_subproblem(sub, inst.factors[0], cfg);
        FAIL() << "expected divergence";
    } catch (const SolverDivergence& e) {
        EXPECT_FALSE(e.trace().empty());
    }
}

TEST(SolveSubproblem, RejectsInfeasibleStart) {
    Rng rng(18);
    RandomInstance inst = small_instance(rng);
    const HmtmlConfig cfg;
    Subproblem sub(inst.factors, inst.problem, cfg, 0);
    FactorMatrix start = inst.factors[0];
    start(0, 0) = -1.0;
    EXPECT_THROW(solve_subproblem(sub, start, cfg), InvalidInput);
    HmtmlConfig free = cfg;
    free.ablation.no_nonneg = true;
    EXPECT_NO_THROW(solve_subproblem(Subproblem(inst.factors, inst.problem, free, 0), start, free));
}

TEST(InitialFactors, RangeAndDeterminism) {
    const std::vector<Eigen::Index> dims{6, 4, 9};
    const auto a = initial_factors(dims, 3, 42);
    const auto b = initial_factors(dims, 3, 42);
    ASSERT_EQ(a.size(), 3u);
    for (std::size_t m = 0; m < 3; ++m) {
        EXPECT_EQ(a[m], b[m]);
        EXPECT_EQ(a[m].rows(), dims[m]);
        EXPECT_GE(a[m].minCoeff(), 0.0);
        EXPECT_LE(a[m].maxCoeff(), 1.0 / std::sqrt(static_cast<double>(dims[m]) * 3));
    }
    EXPECT_NE(initial_factors(dims, 3, 43)[0], a[0]);
}

TEST(Fit, MonotoneAndNonnegative) {
    Rng rng(19);
    for (int trial = 0; trial < 8; ++trial) {
        RandomInstance inst = small_instance(rng, 3, 6, 3, 5);
        HmtmlConfig cfg = config_with(std::pow(10.0, rng.integer(-2, 2)), std::pow(10.0, rng.integer(-3, 0)));
        cfg.seed = static_cast<std::uint64_t>(trial);
        const SolverState st = fit(inst.problem, cfg);
        check_monotone(st.objective_trace);
        for (const auto& u : st.factors) EXPECT_TRUE((u.array() >= 0.0).all());
        EXPECT_EQ(st.objective_trace.size(), static_cast<std::size_t>(st.outer_iterations) + 1);
        EXPECT_EQ(st.inner_steps.size(), static_cast<std::size_t>(st.outer_iterations) * 3);
        EXPECT_NEAR(st.objective_trace.back(), objective(st.factors, inst.problem, cfg), 1e-12);
    }
}

TEST(Fit, DecouplesWithoutCoupling) {
    Rng rng(20);
    RandomInstance inst = small_instance(rng, 3, 6, 2, 3);
    HmtmlConfig cfg = config_with(0.0, 0.0);
    cfg.seed = 5;
    const SolverState joint = fit(inst.problem, cfg);

    // Each domain on its own, for the same number of sweeps.
    std::vector<Eigen::Index> dims;
    for (const auto& w : inst.problem.weights) dims.push_back(w.rows());
    auto factors = initial_factors(dims, cfg.rank, cfg.seed);
    double total = 0.0;
    for (std::size_t m = 0; m < factors.size(); ++m) {
        FactorMatrix u = factors[m];
        for (int k = 0; k < joint.outer_iterations; ++k) {
            auto frozen = factors;
            frozen[m] = u;
            u = solve_subproblem(Subproblem(frozen, inst.problem, cfg, m), u, cfg).factor;
        }
        EXPECT_LE(hmtml::testing::max_abs(u - joint.factors[m]), 1e-12);
        total += empirical_loss(u, inst.problem.pairs[m], cfg.rho);
    }
    EXPECT_NEAR(joint.objective_trace.back(), total, 1e-8);
}

TEST(Fit, InsensitiveToInitializationAndOrder) {
    Rng rng(21);
    RandomInstance inst = hmtml::testing::random_instance(rng, {6, 5, 4}, 2, 4, 10, 12);
    HmtmlConfig cfg = config_with(1.0, 0.01);
    std::vector<double> finals;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        cfg.seed = seed;
        finals.push_back(fit(inst.problem, cfg).objective_trace.back());
    }
    cfg.seed = 1;
    cfg.update_order = {2, 0, 1};
    finals.push_back(fit(inst.problem, cfg).objective_trace.back());
    const auto [lo, hi] = std::minmax_element(finals.begin(), finals.end());
    EXPECT_LE((*hi - *lo) / *lo, 0.05);
}

TEST(Fit, RejectsBadInputs) {
    Rng rng(22);
    RandomInstance inst = small_instance(rng);
    HmtmlConfig cfg;
    cfg.update_order = {0, 0, 1};
    EXPECT_THROW(fit(inst.problem, cfg), InvalidInput);
    cfg.update_order = {0, 1};
    EXPECT_THROW(fit(inst.problem, cfg), InvalidInput);

    HmtmlProblem single = inst.problem;
    single.pairs.resize(1);
    single.weights.resize(1);
    EXPECT_THROW(fit(single, HmtmlConfig{}), InvalidInput);

    HmtmlConfig bad;
    bad.beta = 1.5;
    EXPECT_THROW(fit(inst.problem, bad), InvalidInput);
}

TEST(Fit, CapsAreHonored) {
    Rng rng(23);
    RandomInstance inst = small_instance(rng, 3, 6, 3, 4);
    HmtmlConfig cfg = config_with(1.0, 0.01);
    cfg.max_outer = 2;
    cfg.max_inner = 3;
    cfg.outer_tolerance = 1e-15;
    const SolverState st = fit(inst.problem, cfg);
    EXPECT_LE(st.outer_iterations, 2);
    for (int s : st.inner_steps) EXPECT_LE(s, 3);
}
