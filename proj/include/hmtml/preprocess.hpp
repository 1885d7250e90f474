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
#include <optional>

#include <Eigen/Dense>

namespace hmtml {

enum class KernelKind { Gaussian, Linear };

struct KpcaOptions {
    KernelKind kernel = KernelKind::Gaussian;
    /// Gaussian width omega. Unset: the mean Euclidean distance over all
    /// training pairs.
    std::optional<double> bandwidth;
    /// Fixed output dimension when > 0; otherwise `energy` decides.
    std::size_t components = 0;
    /// Smallest q whose leading eigenvalues hold this fraction of the total.
    double energy = 1.0;
};

/// Fitted kernel PCA. Feature k of a sample is its centered kernel row
/// projected on v_k / sqrt(lambda_k), so training features have variance
/// lambda_k / N and are uncorrelated.
struct KpcaModel {
    KernelKind kernel = KernelKind::Gaussian;
    double bandwidth = 0.0;
    Eigen::MatrixXd train;
    Eigen::RowVectorXd kernel_column_means;
    double kernel_mean = 0.0;
    Eigen::VectorXd eigenvalues;   ///< retained, descending
    Eigen::MatrixXd eigenvectors;  ///< N x q, orthonormal columns
    Eigen::VectorXd spectrum;      ///< every positive eigenvalue, descending

    std::size_t num_components() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
};

double mean_pairwise_distance(const Eigen::MatrixXd& samples);

/// k(a_i, b_j) for all rows.
Eigen::MatrixXd kernel_matrix(KernelKind kind, double bandwidth, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b);

/// H K H with H = I - 11^T / N.
Eigen::MatrixXd double_center(const Eigen::MatrixXd& gram);

/// Throws InvalidInput for N < 2, q > N, energy outside (0, 1], or samples
/// that are all identical. A fixed q larger than the number of positive
/// eigenvalues is clamped to that number.
KpcaModel kpca_fit(const Eigen::MatrixXd& samples, const KpcaOptions& options = {});

Eigen::MatrixXd kpca_transform(const KpcaModel& model, const Eigen::MatrixXd& samples);

Eigen::RowVectorXd column_means(const Eigen::MatrixXd& samples);
Eigen::MatrixXd center_rows(const Eigen::MatrixXd& samples, const Eigen::RowVectorXd& mean);
/// Each row scaled to unit L2 norm; zero rows stay zero.
Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& samples);

}  // namespace hmtml
