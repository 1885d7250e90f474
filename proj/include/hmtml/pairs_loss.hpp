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

#include <Eigen/Dense>

#include "hmtml/domain.hpp"

namespace hmtml {

/// Pairwise differences delta_k = x_i - x_j (one per row) with their
/// similarity signs y_k = +1 (same class) or -1.
struct PairSet {
    Eigen::MatrixXd diffs;
    Eigen::VectorXd signs;

    std::size_t size() const noexcept { return static_cast<std::size_t>(signs.size()); }
    Eigen::Index dim() const noexcept { return diffs.cols(); }
};

struct PairOptions {
    /// 0 keeps every pair. Otherwise at most this many pairs, drawn uniformly
    /// without replacement and kept in lexicographic (i, j) order.
    std::size_t max_pairs = 0;
    std::uint64_t seed = 0;
};

/// All unordered pairs i < j in lexicographic order.
PairSet generate_pairs(const DomainData& data, const PairOptions& options = {});

/// Generalized log loss g(z) = log(1 + exp(-rho z)) / rho, evaluated as
/// max(-z, 0) + log1p(exp(-rho |z|)) / rho so neither tail overflows.
double gl_loss(double z, double rho);

/// Mean of g(y_k (1 - |U^T delta_k|^2)) over the pair set.
double empirical_loss(const FactorMatrix& factor, const PairSet& pairs, double rho);

/// Gradient of empirical_loss w.r.t. U:
/// (1/K) sum_k 2 y_k delta_k delta_k^T U / (1 + exp(rho z_k)).
Eigen::MatrixXd loss_gradient(const FactorMatrix& factor, const PairSet& pairs, double rho);

struct LossEvaluation {
    double value = 0.0;
    Eigen::MatrixXd gradient;
};

/// Value and gradient from one pass over the pairs.
LossEvaluation evaluate_loss(const FactorMatrix& factor, const PairSet& pairs, double rho,
                             bool with_gradient = true);

}  // namespace hmtml
