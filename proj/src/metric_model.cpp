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

#include "hmtml/metric_model.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "hmtml/error.hpp"

namespace hmtml {

Metric Metric::identity(Eigen::Index dim) {
    require(dim >= 1, "metric: dimension must be >= 1");
    Metric m;
    m.dim_ = dim;
    return m;
}

Metric Metric::from_matrix(Eigen::MatrixXd a) {
    require(a.rows() == a.cols() && a.rows() >= 1, "metric: matrix must be square");
    Metric m;
    m.dim_ = a.rows();
    m.matrix_ = std::move(a);
    return m;
}

Metric Metric::from_factor(FactorMatrix u) {
    require(u.rows() >= 1 && u.cols() >= 1, "metric: factor must be nonempty");
    Metric m;
    m.dim_ = u.rows();
    m.factor_ = std::move(u);
    return m;
}

Eigen::MatrixXd Metric::matrix() const {
    if (factor_) return recover_metric(*factor_);
    if (matrix_) return *matrix_;
    return Eigen::MatrixXd::Identity(dim_, dim_);
}

double Metric::distance_sq(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    require(x.size() == dim_ && y.size() == dim_, "metric: dimension mismatch");
    if (factor_) return mahalanobis_sq_factored(x, y, *factor_);
    if (matrix_) return mahalanobis_sq(x, y, *matrix_);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < dim_; ++i) {
        const double d = x(i) - y(i);
        sum += d * d;
    }
    return sum;
}

Eigen::MatrixXd Metric::embed(const Eigen::MatrixXd& rows) const {
    require(rows.cols() == dim_, "metric: dimension mismatch");
    if (factor_) return rows * *factor_;
    return rows;
}

Eigen::MatrixXd Metric::distance_table(const Eigen::MatrixXd& queries,
                                       const Eigen::MatrixXd& train) const {
    require(queries.cols() == dim_ && train.cols() == dim_, "metric: dimension mismatch");
    Eigen::MatrixXd table(queries.rows(), train.rows());
    if (matrix_) {
        for (Eigen::Index q = 0; q < queries.rows(); ++q)
            for (Eigen::Index t = 0; t < train.rows(); ++t)
                table(q, t) = mahalanobis_sq(queries.row(q).transpose(), train.row(t).transpose(), *matrix_);
        return table;
    }
    const Eigen::MatrixXd eq = embed(queries);
    const Eigen::MatrixXd et = embed(train);
    for (Eigen::Index q = 0; q < eq.rows(); ++q)
        for (Eigen::Index t = 0; t < et.rows(); ++t) {
            double sum = 0.0;
            for (Eigen::Index i = 0; i < eq.cols(); ++i) {
                const double d = eq(q, i) - et(t, i);
                sum += d * d;
            }
            table(q, t) = sum;
        }
    return table;
}

Eigen::MatrixXd recover_metric(const FactorMatrix& factor) {
    Eigen::MatrixXd a = factor * factor.transpose();
    // Exact symmetry regardless of summation order.
    return 0.5 * (a + a.transpose());
}

double mahalanobis_sq(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& a) {
    require(x.size() == y.size() && a.rows() == x.size() && a.cols() == x.size(),
            "mahalanobis_sq: dimension mismatch");
    const Eigen::VectorXd d = x - y;
    return std::max(0.0, d.dot(a * d));
}

double mahalanobis_sq_factored(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                               const FactorMatrix& u) {
    require(x.size() == y.size() && u.rows() == x.size(), "mahalanobis_sq: dimension mismatch");
    return (u.transpose() * (x - y)).squaredNorm();
}

std::vector<int> knn_predict(const DomainData& train, const Eigen::MatrixXd& queries,
                             const Metric& metric, int k) {
    require(k >= 1, "knn_predict: k must be >= 1");
    require(train.size() >= 1, "knn_predict: empty training set");
    require(static_cast<std::size_t>(k) <= train.size(),
            "knn_predict: k=" + std::to_string(k) + " exceeds training size " +
                std::to_string(train.size()));
    require(static_cast<std::size_t>(train.samples.rows()) == train.size(),
            "knn_predict: sample/label count mismatch");

    const Eigen::MatrixXd table = metric.distance_table(queries, train.samples);
    const int classes = std::max(train.num_classes,
                                 *std::max_element(train.labels.begin(), train.labels.end()) + 1);

    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(queries.rows()));
    std::vector<std::size_t> order(train.size());
    std::vector<int> votes(static_cast<std::size_t>(classes));
    std::vector<double> summed(static_cast<std::size_t>(classes));
    for (Eigen::Index q = 0; q < table.rows(); ++q) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto closer = [&](std::size_t a, std::size_t b) {
            const double da = table(q, static_cast<Eigen::Index>(a));
            const double db = table(q, static_cast<Eigen::Index>(b));
            return da != db ? da < db : a < b;
        };
        std::partial_sort(order.begin(), order.begin() + k, order.end(), closer);

        std::fill(votes.begin(), votes.end(), 0);
        std::fill(summed.begin(), summed.end(), 0.0);
        for (int i = 0; i < k; ++i) {
            const std::size_t idx = order[static_cast<std::size_t>(i)];
            const auto label = static_cast<std::size_t>(train.labels[idx]);
            ++votes[label];
            summed[label] += table(q, static_cast<Eigen::Index>(idx));
        }
        int best = -1;
        for (int c = 0; c < classes; ++c) {
            const auto cu = static_cast<std::size_t>(c);
            if (votes[cu] == 0) continue;
            if (best < 0) {
                best = c;
                continue;
            }
            const auto bu = static_cast<std::size_t>(best);
            if (votes[cu] > votes[bu] || (votes[cu] == votes[bu] && summed[cu] < summed[bu])) best = c;
        }
        out.push_back(best);
    }
    return out;
}

}  // namespace hmtml
