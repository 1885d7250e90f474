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

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hmtml/domain.hpp"

namespace hmtml {

/// Mahalanobis metric (x - y)^T A (x - y).
///
/// Holds either the full matrix A or a factor U with A = U U^T; distances
/// use the factored form |U^T (x - y)|^2 when a factor is present.
class Metric {
public:
    static Metric identity(Eigen::Index dim);
    static Metric from_matrix(Eigen::MatrixXd a);
    static Metric from_factor(FactorMatrix u);

    Eigen::Index dim() const noexcept { return dim_; }
    bool is_identity() const noexcept { return !matrix_ && !factor_; }
    const std::optional<FactorMatrix>& factor() const noexcept { return factor_; }

    /// A itself, materialized on demand.
    Eigen::MatrixXd matrix() const;

    double distance_sq(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

    /// Rows mapped into the space where the metric is Euclidean (U^T x per
    /// row), or returned unchanged for the identity / full-matrix forms.
    Eigen::MatrixXd embed(const Eigen::MatrixXd& rows) const;

    /// Pairwise squared distances, queries x train.
    Eigen::MatrixXd distance_table(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& train) const;

private:
    Metric() = default;
    Eigen::Index dim_ = 0;
    std::optional<Eigen::MatrixXd> matrix_;
    std::optional<FactorMatrix> factor_;
};

/// A = U U^T.
Eigen::MatrixXd recover_metric(const FactorMatrix& factor);

double mahalanobis_sq(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& a);
double mahalanobis_sq_factored(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                               const FactorMatrix& u);

/// Majority vote among the k nearest training rows. Equal distances are
/// ordered by training index; a tied vote goes to the class with the
/// smallest summed neighbor distance, then to the lowest class id.
std::vector<int> knn_predict(const DomainData& train, const Eigen::MatrixXd& queries,
                             const Metric& metric, int k = 1);

}  // namespace hmtml
