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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hmtml/domain.hpp"
#include "hmtml/pairs_loss.hpp"
#include "hmtml/task_encoding.hpp"

namespace hmtml {

struct AblationFlags {
    bool drop_loss = false;      ///< no empirical loss term
    bool drop_reg = false;       ///< coupling weight forced to 0
    bool frobenius_reg = false;  ///< 0.5 |U|_F^2 in place of the smoothed l1 norm
    bool no_nonneg = false;      ///< skip the projection onto U >= 0

    friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

struct HmtmlConfig {
    double gamma = 1.0;     ///< coupling weight
    double gamma_m = 0.01;  ///< sparsity weight, shared by all domains
    int rank = 5;           ///< common factors r

    double rho = 3.0;    ///< GL-loss sharpness
    double sigma = 0.5;  ///< l1 smoothing
    double kappa = 0.01; ///< sufficient decrease
    double beta = 0.1;   ///< step-size multiplier
    double mu0 = 1.0;    ///< initial step size of every subproblem

    double inner_tolerance = 1e-4;
    double outer_tolerance = 1e-3;
    int max_outer = 20;        ///< Gamma_max
    int max_inner = 100;       ///< T2_max
    int max_step_checks = 50;  ///< T1_max

    AblationFlags ablation;
    /// Domain update order within one sweep; empty means 0, 1, ..., M-1.
    std::vector<int> update_order;
    std::uint64_t seed = 0;

    double effective_gamma() const noexcept { return ablation.drop_reg ? 0.0 : gamma; }
    void validate() const;
};

/// Everything the solver needs besides the factors: per-domain pair sets and
/// the d_m x P task weight matrices (same P, aligned columns).
struct HmtmlProblem {
    std::vector<PairSet> pairs;
    std::vector<Eigen::MatrixXd> weights;

    std::size_t num_domains() const noexcept { return weights.size(); }
    std::size_t num_tasks() const noexcept {
        return weights.empty() ? 0 : static_cast<std::size_t>(weights.front().cols());
    }
    void validate() const;
};

HmtmlProblem make_problem(std::span<const DomainData> domains, const TaskWeights& tasks,
                          const PairOptions& pair_options = {});

/// Sum over entries of the piecewise smoothed |u|: u^2 / (2 sigma) on
/// [-sigma, sigma], |u| - sigma / 2 outside.
double smoothed_l1(const Eigen::MatrixXd& u, double sigma);
/// Entrywise median{u / sigma, -1, 1}.
Eigen::MatrixXd smoothed_l1_grad(const Eigen::MatrixXd& u, double sigma);

/// B_(m) B_(m)^T for B = E_r x_{m' != m} U_{m'}: the Hadamard product of
/// the other domains' Gram matrices U^T U.
Eigen::MatrixXd gram_other(std::span<const FactorMatrix> factors, std::size_t mode);

/// sum_p W^p_(m) B_(m)^T = sum_p w_m^p c_p^T with
/// c_p = Hadamard product over m' != m of U_{m'}^T w_{m'}^p.
Eigen::MatrixXd cross_term(std::span<const FactorMatrix> factors,
                           std::span<const Eigen::MatrixXd> weights, std::size_t mode);

/// (1/P) sum_p |W^p - E_r x_1 U_1 ... x_M U_M|_F^2 from closed forms.
double coupling_term(std::span<const FactorMatrix> factors,
                     std::span<const Eigen::MatrixXd> weights);

/// Full smoothed objective, ablations applied.
double objective(std::span<const FactorMatrix> factors, const HmtmlProblem& problem,
                 const HmtmlConfig& config);

/// Gradient of the smoothed objective with respect to U_m.
Eigen::MatrixXd gradient_Um(std::span<const FactorMatrix> factors, const HmtmlProblem& problem,
                            const HmtmlConfig& config, std::size_t mode);

/// The U_m subproblem with the other factors frozen. The Gram and cross
/// terms are computed once at construction.
///
/// value() equals objective() minus the loss and sparsity terms of the
/// other domains, which do not depend on U_m.
class Subproblem {
public:
    Subproblem(std::span<const FactorMatrix> factors, const HmtmlProblem& problem,
               const HmtmlConfig& config, std::size_t mode);

    struct Evaluation {
        double value = 0.0;
        Eigen::MatrixXd gradient;
    };

    Evaluation evaluate(const FactorMatrix& u, bool with_gradient = true) const;
    double value(const FactorMatrix& u) const { return evaluate(u, false).value; }

    std::size_t mode() const noexcept { return mode_; }
    Eigen::Index rows() const noexcept { return cross_.rows(); }
    Eigen::Index cols() const noexcept { return cross_.cols(); }

private:
    std::size_t mode_;
    const PairSet* pairs_;
    double rho_;
    double sigma_;
    double gamma_;
    double gamma_m_;
    double tasks_;
    bool use_loss_;
    bool frobenius_;
    Eigen::MatrixXd gram_;
    Eigen::MatrixXd cross_;
    double weight_norms_ = 0.0;  // sum_p prod_m |w_m^p|^2
};

struct SubproblemResult {
    FactorMatrix factor;
    std::vector<double> trace;  ///< F at U^0, U^1, ...
    int steps = 0;              ///< accepted PGM steps (T2)
    int max_checks = 0;         ///< most step-size checks in one step (T1)
    int total_checks = 0;
};

/// Projected gradient descent with the grow/shrink step-size search.
/// Throws SolverDivergence on a non-finite value or gradient at an accepted
/// point.
SubproblemResult solve_subproblem(const Subproblem& problem, FactorMatrix start,
                                  const HmtmlConfig& config);

struct SolverState {
    std::vector<FactorMatrix> factors;
    /// Objective at initialization and after every sweep.
    std::vector<double> objective_trace;
    int outer_iterations = 0;
    /// Per subproblem call, in call order.
    std::vector<int> inner_steps;
    std::vector<int> step_checks;
    bool converged = false;
    /// Iteration counts beyond the usual ranges. Informational.
    std::vector<std::string> warnings;
};

/// Seeded U_m^0 with i.i.d. entries uniform on [0, 1/sqrt(d_m r)].
std::vector<FactorMatrix> initial_factors(std::span<const Eigen::Index> dims, int rank,
                                          std::uint64_t seed);

/// Alternating minimization over the factors, starting from
/// initial_factors(config.seed).
SolverState fit(const HmtmlProblem& problem, const HmtmlConfig& config);
SolverState fit(const HmtmlProblem& problem, const HmtmlConfig& config,
                std::vector<FactorMatrix> start);

}  // namespace hmtml
