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

#include <cmath>

#include <gtest/gtest.h>

#include "hmtml/error.hpp"
#include "hmtml/preprocess.hpp"
#include "oracles.hpp"

using namespace hmtml;
using hmtml::testing::Rng;

namespace {

Eigen::MatrixXd blobs(Rng& rng, int per_blob, Eigen::Index dim) {
    Eigen::MatrixXd x = rng.gaussian(3 * per_blob, dim);
    for (int i = 0; i < 3 * per_blob; ++i) x(i, 0) += 4.0 * (i / per_blob);
    return x;
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& f) {
    const Eigen::MatrixXd c = f.rowwise() - f.colwise().mean();
    return c.transpose() * c / static_cast<double>(f.rows());
}

}  // namespace

TEST(Kpca, TwoPointsGiveSymmetricFeature) {
    Eigen::MatrixXd x(2, 2);
    x << 0, 0, 1, 2;
    KpcaOptions opts;
    opts.components = 1;
    const KpcaModel model = kpca_fit(x, opts);
    ASSERT_EQ(model.num_components(), 1u);
    const Eigen::MatrixXd f = kpca_transform(model, x);
    EXPECT_NEAR(f(0, 0), -f(1, 0), 1e-12);
    EXPECT_GT(std::abs(f(0, 0)), 0.1);
}

TEST(Kpca, FullEnergyKeepsCenteredRank) {
    Rng rng(1);
    const Eigen::MatrixXd x = rng.gaussian(12, 3);
    KpcaOptions linear;
    linear.kernel = KernelKind::Linear;
    // Centered linear Gram of 12 points in R^3 has rank 3.
    EXPECT_EQ(kpca_fit(x, linear).num_components(), 3u);

    const KpcaModel gauss = kpca_fit(x);
    const Eigen::MatrixXd centered = double_center(kernel_matrix(KernelKind::Gaussian, gauss.bandwidth, x, x));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(centered);
    lu.setThreshold(1e-12);
    EXPECT_EQ(static_cast<Eigen::Index>(gauss.num_components()), lu.rank());
}

TEST(Kpca, BandwidthIsMeanPairwiseDistance) {
    Rng rng(2);
    const Eigen::MatrixXd x = rng.gaussian(7, 2);
    double sum = 0.0;
    for (int i = 0; i < 7; ++i)
        for (int j = i + 1; j < 7; ++j) sum += (x.row(i) - x.row(j)).norm();
    EXPECT_NEAR(kpca_fit(x).bandwidth, sum / 21.0, 1e-14);
    KpcaOptions fixed;
    fixed.bandwidth = 0.7;
    EXPECT_EQ(kpca_fit(x, fixed).bandwidth, 0.7);
}

TEST(Kpca, EigenvaluesPositiveAndDescending) {
    Rng rng(3);
    const KpcaModel m = kpca_fit(blobs(rng, 10, 3));
    for (Eigen::Index k = 0; k < m.eigenvalues.size(); ++k) {
        EXPECT_GT(m.eigenvalues(k), 1e-12);
        if (k > 0) EXPECT_LE(m.eigenvalues(k), m.eigenvalues(k - 1));
    }
    const Eigen::MatrixXd gram = m.eigenvectors.transpose() * m.eigenvectors;
    EXPECT_LE(hmtml::testing::max_abs(gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())), 1e-10);
}

TEST(Kpca, TrainingFeaturesAreDecorrelatedWithEigenvalueVariance) {
    Rng rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXd x = blobs(rng, 12, 4);
        KpcaOptions opts;
        opts.components = 10;
        const KpcaModel m = kpca_fit(x, opts);
        const Eigen::MatrixXd cov = covariance(kpca_transform(m, x));
        const double n = static_cast<double>(x.rows());
        for (Eigen::Index i = 0; i < cov.rows(); ++i) {
            EXPECT_NEAR(cov(i, i), m.eigenvalues(i) / n, 1e-8 * m.eigenvalues(i) / n);
            for (Eigen::Index j = 0; j < cov.cols(); ++j)
                if (i != j) EXPECT_LE(std::abs(cov(i, j)), 1e-8 * std::sqrt(cov(i, i) * cov(j, j)));
        }
    }
}

TEST(Kpca, EnergySelectsSmallestPrefix) {
    Rng rng(5);
    const Eigen::MatrixXd x = blobs(rng, 10, 3);
    for (double energy : {0.2, 0.5, 0.9}) {
        KpcaOptions opts;
        opts.energy = energy;
        const KpcaModel m = kpca_fit(x, opts);
        const double total = m.spectrum.sum();
        const auto q = static_cast<Eigen::Index>(m.num_components());
        EXPECT_GE(m.spectrum.head(q).sum(), energy * total * (1 - 1e-12));
        if (q > 1) EXPECT_LT(m.spectrum.head(q - 1).sum(), energy * total);
    }
}

TEST(Kpca, TruncationBound) {
    Rng rng(6);
    for (double energy : {0.2, 0.5, 0.8, 0.95}) {
        const Eigen::MatrixXd x = blobs(rng, 15, 5);
        KpcaOptions opts;
        opts.energy = energy;
        const KpcaModel m = kpca_fit(x, opts);
        const Eigen::MatrixXd centered = double_center(kernel_matrix(KernelKind::Gaussian, m.bandwidth, x, x));
        const Eigen::MatrixXd approx = m.eigenvectors * m.eigenvalues.asDiagonal() * m.eigenvectors.transpose();
        const double rel_sq = (centered - approx).squaredNorm() / centered.squaredNorm();
        EXPECT_LE(rel_sq, 1.0 - energy + 1e-12) << "energy " << energy;
    }
}

TEST(Kpca, TransformReproducesFitAndDuplicates) {
    Rng rng(7);
    const Eigen::MatrixXd x = blobs(rng, 8, 3);
    const KpcaModel m = kpca_fit(x);
    const Eigen::MatrixXd f = kpca_transform(m, x);
    // Fit-time features: sqrt(lambda_k) v_k.
    const Eigen::MatrixXd expected = m.eigenvectors * m.eigenvalues.cwiseSqrt().asDiagonal();
    EXPECT_LE(hmtml::testing::max_abs(f - expected), 1e-10);
    const Eigen::MatrixXd dup = kpca_transform(m, x.row(5));
    EXPECT_LE(hmtml::testing::max_abs(dup - f.row(5)), 1e-10);
}

TEST(Kpca, HoldoutMatchesFirstPrinciplesProjection) {
    Rng rng(8);
    const Eigen::MatrixXd x = blobs(rng, 10, 3);
    const Eigen::MatrixXd holdout = rng.gaussian(6, 3);
    KpcaOptions opts;
    opts.components = 6;
    const KpcaModel m = kpca_fit(x, opts);

    // Center in feature space with explicit H = I - 11^T / N.
    const Eigen::Index n = x.rows();
    const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    const Eigen::MatrixXd k = kernel_matrix(KernelKind::Gaussian, m.bandwidth, x, x);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h * k * h);
    const Eigen::MatrixXd kx = kernel_matrix(KernelKind::Gaussian, m.bandwidth, holdout, x);
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(holdout.rows(), n, 1.0 / n);
    const Eigen::MatrixXd centered = (kx - ones * k) * h;
    const Eigen::MatrixXd f = kpca_transform(m, holdout);
    for (Eigen::Index c = 0; c < 6; ++c) {
        const Eigen::Index col = n - 1 - c;
        const Eigen::VectorXd v = eig.eigenvectors().col(col);
        Eigen::VectorXd ref = centered * v / std::sqrt(eig.eigenvalues()(col));
        if (ref.dot(f.col(c)) < 0) ref = -ref;
        EXPECT_LE((ref - f.col(c)).cwiseAbs().maxCoeff(), 1e-8) << "component " << c;
    }
}

TEST(Kpca, RejectsBadInputs) {
    Rng rng(9);
    const Eigen::MatrixXd x = rng.gaussian(5, 2);
    KpcaOptions too_many;
    too_many.components = 6;
    EXPECT_THROW(kpca_fit(x, too_many), InvalidInput);
    EXPECT_THROW(kpca_fit(Eigen::MatrixXd::Ones(4, 3)), InvalidInput);
    EXPECT_THROW(kpca_fit(x.topRows(1)), InvalidInput);
    KpcaOptions zero_energy;
    zero_energy.energy = 0.0;
    EXPECT_THROW(kpca_fit(x, zero_energy), InvalidInput);
    const KpcaModel m = kpca_fit(x);
    EXPECT_THROW(kpca_transform(m, rng.gaussian(2, 3)), InvalidInput);
}

TEST(Kpca, LinearKernelMatchesPca) {
    Rng rng(10);
    const Eigen::MatrixXd x = rng.gaussian(20, 4) * rng.matrix(4, 4);
    KpcaOptions opts;
    opts.kernel = KernelKind::Linear;
    const KpcaModel m = kpca_fit(x, opts);
    const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c.transpose() * c);
    // Centered-Gram eigenvalues equal scatter eigenvalues.
    for (Eigen::Index k = 0; k < 4; ++k) EXPECT_NEAR(m.eigenvalues(k), eig.eigenvalues()(3 - k), 1e-9);
}

TEST(Utilities, CenterAndNormalize) {
    Eigen::MatrixXd x(3, 2);
    x << 1, 2, 3, 4, 0, 0;
    const Eigen::RowVectorXd mean = column_means(x);
    EXPECT_NEAR(mean(0), 4.0 / 3.0, 1e-15);
    EXPECT_LE(center_rows(x, mean).colwise().sum().cwiseAbs().maxCoeff(), 1e-14);
    const Eigen::MatrixXd n = normalize_rows(x);
    EXPECT_NEAR(n.row(0).norm(), 1.0, 1e-15);
    EXPECT_EQ(n.row(2), Eigen::RowVector2d(0, 0));
    EXPECT_THROW(center_rows(x, Eigen::RowVector3d::Zero()), InvalidInput);
}
