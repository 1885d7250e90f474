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

#include "hmtml/pairs_loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "hmtml/error.hpp"

namespace hmtml {

PairSet generate_pairs(const DomainData& data, const PairOptions& options) {
    const std::size_t n = data.size();
    require(n >= 2, "generate_pairs: need at least two samples, got " + std::to_string(n));
    require(static_cast<std::size_t>(data.samples.rows()) == n,
            "generate_pairs: sample/label count mismatch");

    const std::size_t total = n * (n - 1) / 2;
    std::vector<std::size_t> keep;
    if (options.max_pairs > 0 && options.max_pairs < total) {
        keep.resize(total);
        std::iota(keep.begin(), keep.end(), std::size_t{0});
        std::mt19937_64 rng(options.seed);
        for (std::size_t k = 0; k < options.max_pairs; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, total - 1);
            std::swap(keep[k], keep[pick(rng)]);
        }
        keep.resize(options.max_pairs);
        std::sort(keep.begin(), keep.end());
    }

    const std::size_t count = keep.empty() ? total : keep.size();
    PairSet pairs;
    pairs.diffs.resize(static_cast<Eigen::Index>(count), data.samples.cols());
    pairs.signs.resize(static_cast<Eigen::Index>(count));

    std::size_t linear = 0;
    std::size_t row = 0;
    auto next_kept = keep.begin();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j, ++linear) {
            if (!keep.empty()) {
                if (next_kept == keep.end() || *next_kept != linear) continue;
                ++next_kept;
            }
            const auto r = static_cast<Eigen::Index>(row++);
            pairs.diffs.row(r) = data.samples.row(static_cast<Eigen::Index>(i)) -
                                 data.samples.row(static_cast<Eigen::Index>(j));
            pairs.signs(r) = data.labels[i] == data.labels[j] ? 1.0 : -1.0;
        }
    return pairs;
}

double gl_loss(double z, double rho) {
    return std::max(-z, 0.0) + std::log1p(std::exp(-rho * std::abs(z))) / rho;
}

LossEvaluation evaluate_loss(const FactorMatrix& factor, const PairSet& pairs, double rho,
                             bool with_gradient) {
    require(pairs.size() > 0, "empirical loss: empty pair set");
    require(factor.rows() == pairs.dim(),
            "empirical loss: factor has " + std::to_string(factor.rows()) +
                " rows but pair differences have dimension " + std::to_string(pairs.dim()));
    require(rho > 0.0, "empirical loss: rho must be positive");

    const Eigen::MatrixXd projected = pairs.diffs * factor;  // K x r, row k = (U^T delta_k)^T
    const Eigen::VectorXd dist = projected.rowwise().squaredNorm();
    const auto count = static_cast<double>(pairs.size());

    LossEvaluation out;
    Eigen::VectorXd weights(pairs.signs.size());
    double sum = 0.0;
    for (Eigen::Index k = 0; k < pairs.signs.size(); ++k) {
        const double y = pairs.signs(k);
        const double z = y * (1.0 - dist(k));
        // gl_loss(z) and 1 / (1 + exp(rho z)) share e; both stay finite for any z.
        const double e = std::exp(-rho * std::abs(z));
        sum += std::max(-z, 0.0) + std::log1p(e) / rho;
        if (with_gradient) weights(k) = 2.0 * y * (z > 0.0 ? e / (1.0 + e) : 1.0 / (1.0 + e)) / count;
    }
    out.value = sum / count;
    if (with_gradient) out.gradient = pairs.diffs.transpose() * (weights.asDiagonal() * projected);
    return out;
}

double empirical_loss(const FactorMatrix& factor, const PairSet& pairs, double rho) {
    return evaluate_loss(factor, pairs, rho, false).value;
}

Eigen::MatrixXd loss_gradient(const FactorMatrix& factor, const PairSet& pairs, double rho) {
    return evaluate_loss(factor, pairs, rho, true).gradient;
}

}  // namespace hmtml
