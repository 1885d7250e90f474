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

#include "hmtml/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hmtml/error.hpp"
#include "hmtml/seeding.hpp"

namespace hmtml {

void HmtmlConfig::validate() const {
    require(gamma >= 0.0 && gamma_m >= 0.0, "config: gamma and gamma_m must be nonnegative");
    require(rank >= 1, "config: rank must be >= 1");
    require(rho > 0.0, "config: rho must be positive");
    require(sigma > 0.0, "config: sigma must be positive");
    require(kappa > 0.0 && kappa < 1.0, "config: kappa must lie in (0, 1)");
    require(beta > 0.0 && beta < 1.0, "config: beta must lie in (0, 1)");
    require(mu0 > 0.0, "config: mu0 must be positive");
    require(inner_tolerance > 0.0 && outer_tolerance > 0.0, "config: tolerances must be positive");
    require(max_outer >= 1 && max_inner >= 1 && max_step_checks >= 1,
            "config: iteration caps must be >= 1");
}

void HmtmlProblem::validate() const {
    require(weights.size() >= 2, "problem: need at least two domains");
    require(pairs.size() == weights.size(), "problem: one pair set per domain required");
    const auto tasks = weights.front().cols();
    require(tasks >= 1, "problem: need at least one task");
    for (std::size_t m = 0; m < weights.size(); ++m) {
        require(weights[m].cols() == tasks, "problem: task count differs across domains");
        require(pairs[m].size() > 0, "problem: empty pair set for domain " + std::to_string(m));
        require(pairs[m].dim() == weights[m].rows(),
                "problem: pair and weight dimensions differ for domain " + std::to_string(m));
    }
}

HmtmlProblem make_problem(std::span<const DomainData> domains, const TaskWeights& tasks,
                          const PairOptions& pair_options) {
    require(domains.size() == tasks.num_domains(), "make_problem: domain count mismatch");
    HmtmlProblem problem;
    problem.weights = tasks.per_domain;
    for (std::size_t m = 0; m < domains.size(); ++m) {
        PairOptions opts = pair_options;
        opts.seed = derive_seed(pair_options.seed, {m});
        problem.pairs.push_back(generate_pairs(domains[m], opts));
    }
    problem.validate();
    return problem;
}

double smoothed_l1(const Eigen::MatrixXd& u, double sigma) {
    require(sigma > 0.0, "smoothed_l1: sigma must be positive");
    double sum = 0.0;
    for (Eigen::Index j = 0; j < u.cols(); ++j)
        for (Eigen::Index i = 0; i < u.rows(); ++i) {
            const double v = u(i, j);
            const double a = std::abs(v);
            sum += a > sigma ? a - 0.5 * sigma : v * v / (2.0 * sigma);
        }
    return sum;
}

Eigen::MatrixXd smoothed_l1_grad(const Eigen::MatrixXd& u, double sigma) {
    require(sigma > 0.0, "smoothed_l1_grad: sigma must be positive");
    return (u.array() / sigma).cwiseMax(-1.0).cwiseMin(1.0).matrix();
}

namespace {

void check_factors(std::span<const FactorMatrix> factors, std::size_t mode) {
    require(factors.size() >= 2, "need at least two factor matrices");
    require(mode < factors.size(), "mode out of range");
    const auto r = factors.front().cols();
    for (const auto& u : factors) require(u.cols() == r, "factor matrices disagree on rank");
}

}  // namespace

Eigen::MatrixXd gram_other(std::span<const FactorMatrix> factors, std::size_t mode) {
    check_factors(factors, mode);
    const auto r = factors.front().cols();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Ones(r, r);
    for (std::size_t k = 0; k < factors.size(); ++k)
        if (k != mode) gram.array() *= (factors[k].transpose() * factors[k]).array();
    return gram;
}

Eigen::MatrixXd cross_term(std::span<const FactorMatrix> factors,
                           std::span<const Eigen::MatrixXd> weights, std::size_t mode) {
    check_factors(factors, mode);
    require(weights.size() == factors.size(), "cross_term: one weight matrix per domain required");
    const auto tasks = weights.front().cols();
    for (std::size_t k = 0; k < weights.size(); ++k) {
        require(weights[k].cols() == tasks, "cross_term: task count differs across domains");
        require(weights[k].rows() == factors[k].rows(),
                "cross_term: weight/factor dimension mismatch in domain " + std::to_string(k));
    }

    // Column p of `coeffs` is c_p.
    const auto r = factors.front().cols();
    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Ones(r, tasks);
    for (std::size_t k = 0; k < factors.size(); ++k)
        if (k != mode) coeffs.array() *= (factors[k].transpose() * weights[k]).array();
    return weights[mode] * coeffs.transpose();
}

namespace {

// sum_p prod_m |w_m^p|^2
double weight_norm_sum(std::span<const Eigen::MatrixXd> weights) {
    Eigen::RowVectorXd prod = Eigen::RowVectorXd::Ones(weights.front().cols());
    for (const auto& w : weights) prod.array() *= w.colwise().squaredNorm().array();
    return prod.sum();
}

}  // namespace

double coupling_term(std::span<const FactorMatrix> factors,
                     std::span<const Eigen::MatrixXd> weights) {
    const Eigen::MatrixXd cross = cross_term(factors, weights, 0);
    const Eigen::MatrixXd gram = gram_other(factors, 0);
    const auto tasks = static_cast<double>(weights.front().cols());
    const FactorMatrix& u = factors[0];
    const double quadratic = ((u.transpose() * u).array() * gram.array()).sum();
    const double linear = (u.array() * cross.array()).sum();
    return (weight_norm_sum(weights) - 2.0 * linear + tasks * quadratic) / tasks;
}

double objective(std::span<const FactorMatrix> factors, const HmtmlProblem& problem,
                 const HmtmlConfig& config) {
    problem.validate();
    require(factors.size() == problem.num_domains(), "objective: factor count mismatch");
    double value = 0.0;
    for (std::size_t m = 0; m < factors.size(); ++m) {
        require(factors[m].rows() == problem.weights[m].rows(),
                "objective: factor dimension mismatch in domain " + std::to_string(m));
        if (!config.ablation.drop_loss) value += empirical_loss(factors[m], problem.pairs[m], config.rho);
        if (config.gamma_m > 0.0) {
            const double reg = config.ablation.frobenius_reg ? 0.5 * factors[m].squaredNorm()
                                                             : smoothed_l1(factors[m], config.sigma);
            value += config.gamma_m * reg;
        }
    }
    const double gamma = config.effective_gamma();
    if (gamma > 0.0) value += gamma * coupling_term(factors, problem.weights);
    return value;
}

Subproblem::Subproblem(std::span<const FactorMatrix> factors, const HmtmlProblem& problem,
                       const HmtmlConfig& config, std::size_t mode)
    : mode_(mode),
      pairs_(&problem.pairs.at(mode)),
      rho_(config.rho),
      sigma_(config.sigma),
      gamma_(config.effective_gamma()),
      gamma_m_(config.gamma_m),
      tasks_(static_cast<double>(problem.num_tasks())),
      use_loss_(!config.ablation.drop_loss),
      frobenius_(config.ablation.frobenius_reg) {
    problem.validate();
    require(factors.size() == problem.num_domains(), "subproblem: factor count mismatch");
    for (std::size_t m = 0; m < factors.size(); ++m)
        require(factors[m].rows() == problem.weights[m].rows(),
                "subproblem: factor dimension mismatch in domain " + std::to_string(m));
    gram_ = gram_other(factors, mode);
    cross_ = cross_term(factors, problem.weights, mode);
    weight_norms_ = weight_norm_sum(problem.weights);
}

Subproblem::Evaluation Subproblem::evaluate(const FactorMatrix& u, bool with_gradient) const {
    require(u.rows() == cross_.rows() && u.cols() == cross_.cols(),
            "subproblem: factor shape mismatch");
    Evaluation out;
    if (with_gradient) out.gradient = Eigen::MatrixXd::Zero(u.rows(), u.cols());

    if (use_loss_) {
        LossEvaluation loss = evaluate_loss(u, *pairs_, rho_, with_gradient);
        out.value += loss.value;
        if (with_gradient) out.gradient += loss.gradient;
    }
    if (gamma_ > 0.0) {
        const Eigen::MatrixXd ug = u * gram_;
        const double quadratic = (u.array() * ug.array()).sum();
        const double linear = (u.array() * cross_.array()).sum();
        out.value += gamma_ / tasks_ * (weight_norms_ - 2.0 * linear + tasks_ * quadratic);
        if (with_gradient) out.gradient += 2.0 * gamma_ * ug - (2.0 * gamma_ / tasks_) * cross_;
    }
    if (gamma_m_ > 0.0) {
        if (frobenius_) {
            out.value += gamma_m_ * 0.5 * u.squaredNorm();
            if (with_gradient) out.gradient += gamma_m_ * u;
        } else {
            out.value += gamma_m_ * smoothed_l1(u, sigma_);
            if (with_gradient) out.gradient += gamma_m_ * smoothed_l1_grad(u, sigma_);
        }
    }
    return out;
}

Eigen::MatrixXd gradient_Um(std::span<const FactorMatrix> factors, const HmtmlProblem& problem,
                            const HmtmlConfig& config, std::size_t mode) {
    Subproblem sub(factors, problem, config, mode);
    return sub.evaluate(factors[mode], true).gradient;
}

namespace {

bool finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

SubproblemResult solve_subproblem(const Subproblem& problem, FactorMatrix start,
                                  const HmtmlConfig& config) {
    config.validate();
    const bool project = !config.ablation.no_nonneg;
    require(start.rows() == problem.rows() && start.cols() == problem.cols(),
            "solve_subproblem: start has the wrong shape");
    require(!project || (start.array() >= 0.0).all(),
            "solve_subproblem: start point violates the nonnegativity constraint");

    SubproblemResult result;
    result.factor = std::move(start);
    FactorMatrix& u = result.factor;

    Subproblem::Evaluation current = problem.evaluate(u, true);
    result.trace.push_back(current.value);
    if (!std::isfinite(current.value) || !finite(current.gradient))
        throw SolverDivergence("solve_subproblem: non-finite objective or gradient at start",
                               result.trace);
    const double initial = current.value;

    struct Candidate {
        FactorMatrix point;
        double value = 0.0;
        bool accepted = false;
    };
    auto try_step = [&](double mu) {
        Candidate c;
        c.point = u - mu * current.gradient;
        if (project) c.point = c.point.cwiseMax(0.0);
        c.value = problem.value(c.point);
        const double predicted = (current.gradient.array() * (c.point - u).array()).sum();
        c.accepted = std::isfinite(c.value) && c.value - current.value <= config.kappa * predicted;
        return c;
    };

    double mu = config.mu0;
    for (int t = 0; t < config.max_inner; ++t) {
        int checks = 1;
        Candidate cand = try_step(mu);
        if (cand.accepted) {
            while (checks < config.max_step_checks) {
                Candidate bigger = try_step(mu / config.beta);
                ++checks;
                if (!bigger.accepted || bigger.point == cand.point) break;
                mu /= config.beta;
                cand = std::move(bigger);
            }
        } else {
            while (!cand.accepted && checks < config.max_step_checks) {
                mu *= config.beta;
                cand = try_step(mu);
                ++checks;
            }
        }
        result.max_checks = std::max(result.max_checks, checks);
        result.total_checks += checks;
        if (!cand.accepted) break;
        // Stationary: the projected step does not move.
        if (cand.point == u) break;

        const double previous = current.value;
        u = std::move(cand.point);
        current = problem.evaluate(u, true);
        ++result.steps;
        result.trace.push_back(current.value);
        if (!std::isfinite(current.value) || !finite(current.gradient))
            throw SolverDivergence("solve_subproblem: non-finite objective or gradient",
                                   result.trace);

        const double progress = std::abs(current.value - initial);
        if (progress < 1e-15) break;
        if (std::abs(current.value - previous) / progress < config.inner_tolerance) break;
    }
    return result;
}

std::vector<FactorMatrix> initial_factors(std::span<const Eigen::Index> dims, int rank,
                                          std::uint64_t seed) {
    require(rank >= 1, "initial_factors: rank must be >= 1");
    std::vector<FactorMatrix> out;
    for (std::size_t m = 0; m < dims.size(); ++m) {
        require(dims[m] >= 1, "initial_factors: dimensions must be >= 1");
        std::mt19937_64 rng(derive_seed(seed, {m}));
        const double scale = 1.0 / std::sqrt(static_cast<double>(dims[m]) * rank);
        FactorMatrix u(dims[m], rank);
        for (Eigen::Index j = 0; j < u.cols(); ++j)
            for (Eigen::Index i = 0; i < u.rows(); ++i)
                u(i, j) = scale * static_cast<double>(rng() >> 11) * 0x1.0p-53;
        out.push_back(std::move(u));
    }
    return out;
}

SolverState fit(const HmtmlProblem& problem, const HmtmlConfig& config) {
    std::vector<Eigen::Index> dims;
    for (const auto& w : problem.weights) dims.push_back(w.rows());
    return fit(problem, config, initial_factors(dims, config.rank, config.seed));
}

SolverState fit(const HmtmlProblem& problem, const HmtmlConfig& config,
                std::vector<FactorMatrix> start) {
    config.validate();
    problem.validate();
    const std::size_t domains = problem.num_domains();
    require(start.size() == domains, "fit: one starting factor per domain required");
    for (std::size_t m = 0; m < domains; ++m)
        require(start[m].rows() == problem.weights[m].rows() && start[m].cols() == config.rank,
                "fit: starting factor has the wrong shape in domain " + std::to_string(m));

    std::vector<int> order = config.update_order;
    if (order.empty()) {
        order.resize(domains);
        std::iota(order.begin(), order.end(), 0);
    }
    {
        std::vector<int> sorted = order;
        std::sort(sorted.begin(), sorted.end());
        bool permutation = sorted.size() == domains;
        for (std::size_t i = 0; permutation && i < domains; ++i)
            permutation = sorted[i] == static_cast<int>(i);
        require(permutation, "fit: update order must be a permutation of the domains");
    }

    SolverState state;
    state.factors = std::move(start);
    double previous = objective(state.factors, problem, config);
    state.objective_trace.push_back(previous);
    if (!std::isfinite(previous))
        throw SolverDivergence("fit: non-finite objective at initialization", state.objective_trace);

    for (int k = 0; k < config.max_outer; ++k) {
        for (int m : order) {
            const auto mode = static_cast<std::size_t>(m);
            Subproblem sub(state.factors, problem, config, mode);
            SubproblemResult res = solve_subproblem(sub, state.factors[mode], config);
            state.factors[mode] = std::move(res.factor);
            state.inner_steps.push_back(res.steps);
            state.step_checks.push_back(res.max_checks);
        }
        ++state.outer_iterations;
        const double current = objective(state.factors, problem, config);
        state.objective_trace.push_back(current);
        if (!std::isfinite(current))
            throw SolverDivergence("fit: non-finite objective", state.objective_trace);

        const double change = std::abs(current - previous);
        const double scale = std::abs(previous);
        previous = current;
        if (change < 1e-15 || (scale > 0.0 && change / scale < config.outer_tolerance)) {
            state.converged = true;
            break;
        }
    }

    // Typical counts are below 10 sweeps, 20 PGM steps and 50 step checks.
    if (state.outer_iterations >= 10)
        state.warnings.push_back("outer sweeps: " + std::to_string(state.outer_iterations));
    const int most_steps =
        state.inner_steps.empty() ? 0 : *std::max_element(state.inner_steps.begin(), state.inner_steps.end());
    if (most_steps >= 20) state.warnings.push_back("max PGM steps per subproblem: " + std::to_string(most_steps));
    const int most_checks =
        state.step_checks.empty() ? 0 : *std::max_element(state.step_checks.begin(), state.step_checks.end());
    if (most_checks >= 50) state.warnings.push_back("max step-size checks: " + std::to_string(most_checks));
    return state;
}

}  // namespace hmtml
