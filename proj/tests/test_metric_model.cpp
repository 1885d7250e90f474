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

#include <gtest/gtest.h>

#include "hmtml/error.hpp"
#include "hmtml/metric_model.hpp"
#include "oracles.hpp"

using namespace hmtml;
using hmtml::testing::Rng;

TEST(RecoverMetric, IdentityAndZero) {
    EXPECT_EQ(recover_metric(Eigen::MatrixXd::Identity(3, 3)), Eigen::MatrixXd::Identity(3, 3));
    EXPECT_EQ(recover_metric(Eigen::MatrixXd::Zero(4, 2)), Eigen::MatrixXd::Zero(4, 4));
}

TEST(RecoverMetric, PsdWithRankAtMostR) {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd a = recover_metric(rng.matrix(5, 2));
        EXPECT_EQ(a, a.transpose());
        const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues();
        const double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
        int nonzero = 0;
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            EXPECT_GE(ev(i), -tol);
            nonzero += ev(i) > tol ? 1 : 0;
        }
        EXPECT_LE(nonzero, 2);
    }
}

TEST(Mahalanobis, BasicIdentities) {
    Rng rng(2);
    const Eigen::VectorXd x = rng.matrix(4, 1), y = rng.matrix(4, 1);
    const Eigen::MatrixXd u = rng.matrix(4, 3);
    EXPECT_EQ(mahalanobis_sq(x, x, recover_metric(u)), 0.0);
    EXPECT_NEAR(mahalanobis_sq(x, y, Eigen::MatrixXd::Identity(4, 4)), (x - y).squaredNorm(), 1e-15);
    EXPECT_NEAR(mahalanobis_sq(x, y, recover_metric(u)), mahalanobis_sq_factored(x, y, u), 1e-10);
    EXPECT_THROW(mahalanobis_sq(x, Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(4, 4)), InvalidInput);
    EXPECT_THROW(mahalanobis_sq_factored(x, y, rng.matrix(3, 2)), InvalidInput);
}

TEST(Metric, FormsAgree) {
    Rng rng(3);
    const Eigen::MatrixXd u = rng.matrix(5, 2);
    const Metric factored = Metric::from_factor(u);
    const Metric dense = Metric::from_matrix(recover_metric(u));
    const Eigen::MatrixXd q = rng.matrix(4, 5), t = rng.matrix(6, 5);
    EXPECT_LE(hmtml::testing::max_abs(factored.distance_table(q, t) - dense.distance_table(q, t)), 1e-12);
    EXPECT_NEAR(factored.distance_sq(q.row(0).transpose(), t.row(1).transpose()),
                dense.distance_sq(q.row(0).transpose(), t.row(1).transpose()), 1e-12);
    EXPECT_EQ(factored.matrix(), recover_metric(u));
    EXPECT_TRUE(Metric::identity(5).is_identity());
    EXPECT_EQ(Metric::identity(3).matrix(), Eigen::MatrixXd::Identity(3, 3));
    EXPECT_THROW(factored.distance_table(rng.matrix(2, 4), t), InvalidInput);
}

namespace {

DomainData line(std::vector<double> xs, std::vector<int> labels, int classes) {
    DomainData d;
    d.samples.resize(static_cast<Eigen::Index>(xs.size()), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) d.samples(static_cast<Eigen::Index>(i), 0) = xs[i];
    d.labels = std::move(labels);
    d.num_classes = classes;
    return d;
}

}  // namespace

TEST(Knn, QueryOnTrainingPoint) {
    Rng rng(4);
    const DomainData train = rng.domain(10, 3, 3);
    const auto pred = knn_predict(train, train.samples, Metric::identity(3), 1);
    for (std::size_t i = 0; i < train.size(); ++i) EXPECT_EQ(pred[i], train.labels[i]);
}

TEST(Knn, ZeroMetricFallsBackToIndexOrder) {
    const DomainData train = line({0.0, 1.0, 2.0}, {2, 0, 1}, 3);
    const Eigen::MatrixXd q = Eigen::MatrixXd::Constant(2, 1, 5.0);
    const Metric zero = Metric::from_factor(Eigen::MatrixXd::Zero(1, 1));
    EXPECT_EQ(knn_predict(train, q, zero, 1), (std::vector<int>{2, 2}));
    // k = 3: one vote each, equal summed distance 0, lowest id wins.
    EXPECT_EQ(knn_predict(train, q, zero, 3), (std::vector<int>{0, 0}));
}

TEST(Knn, HandMetricOnThreePoints) {
    // Distances from 1.2 under A = 4: (1.2)^2*4, (0.2)^2*4, (1.8)^2*4.
    const DomainData train = line({0.0, 1.0, 3.0}, {0, 1, 2}, 3);
    Eigen::MatrixXd q(1, 1);
    q << 1.2;
    const Metric m = Metric::from_matrix(Eigen::MatrixXd::Constant(1, 1, 4.0));
    EXPECT_EQ(knn_predict(train, q, m, 1), std::vector<int>{1});
    // k = 2 picks points 1 and 0: one vote each, class 1 closer.
    EXPECT_EQ(knn_predict(train, q, m, 2), std::vector<int>{1});
    const Eigen::MatrixXd table = m.distance_table(q, train.samples);
    EXPECT_NEAR(table(0, 0), 5.76, 1e-12);
    EXPECT_NEAR(table(0, 1), 0.16, 1e-12);
    EXPECT_NEAR(table(0, 2), 12.96, 1e-12);
}

TEST(Knn, MajorityThenSummedDistance) {
    const DomainData train = line({0.0, 0.5, 0.6, 10.0}, {1, 0, 0, 1}, 2);
    Eigen::MatrixXd q(1, 1);
    q << 0.1;
    EXPECT_EQ(knn_predict(train, q, Metric::identity(1), 3), std::vector<int>{0});
    // Equal votes: classes 0 and 1 at equal count, summed distance decides.
    const DomainData tie = line({-1.0, 0.5, 2.0, 3.0}, {0, 1, 0, 1}, 2);
    Eigen::MatrixXd q2(1, 1);
    q2 << 0.0;
    EXPECT_EQ(knn_predict(tie, q2, Metric::identity(1), 2), std::vector<int>{1});
}

TEST(Knn, EqualDistancesUseTrainingIndex) {
    const DomainData train = line({-1.0, 1.0}, {1, 0}, 2);
    Eigen::MatrixXd q(1, 1);
    q << 0.0;
    EXPECT_EQ(knn_predict(train, q, Metric::identity(1), 1), std::vector<int>{1});
}

TEST(Knn, IdentityEqualsEuclideanOracle) {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index d = rng.integer(1, 6);
        const DomainData train = rng.domain(rng.integer(3, 30), d, 3);
        const Eigen::MatrixXd q = rng.gaussian(rng.integer(1, 20), d);
        EXPECT_EQ(knn_predict(train, q, Metric::identity(d), 1), hmtml::testing::euclidean_1nn(train, q));
    }
}

TEST(Knn, ScaleInvariance) {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const DomainData train = rng.domain(25, 4, 3);
        const Eigen::MatrixXd q = rng.gaussian(15, 4);
        const Eigen::MatrixXd a = recover_metric(rng.matrix(4, 2));
        const auto base = knn_predict(train, q, Metric::from_matrix(a), 1);
        for (double s : {0.25, 8.0}) EXPECT_EQ(knn_predict(train, q, Metric::from_matrix(s * s * a), 1), base);
    }
}

TEST(Knn, RejectsBadArguments) {
    const DomainData train = line({0.0, 1.0}, {0, 1}, 2);
    const Eigen::MatrixXd q = Eigen::MatrixXd::Zero(1, 1);
    EXPECT_THROW(knn_predict(train, q, Metric::identity(1), 3), InvalidInput);
    EXPECT_THROW(knn_predict(train, q, Metric::identity(1), 0), InvalidInput);
    EXPECT_THROW(knn_predict(train, Eigen::MatrixXd::Zero(1, 2), Metric::identity(1), 1), InvalidInput);
}
