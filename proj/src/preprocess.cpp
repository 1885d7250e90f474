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

#include "hmtml/preprocess.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "hmtml/error.hpp"

namespace hmtml {

double mean_pairwise_distance(const Eigen::MatrixXd& samples) {
    const Eigen::Index n = samples.rows();
    require(n >= 2, "mean_pairwise_distance: need at least two samples");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) sum += (samples.row(i) - samples.row(j)).norm();
    return sum / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

Eigen::MatrixXd kernel_matrix(KernelKind kind, double bandwidth, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
    require(a.cols() == b.cols(), "kernel_matrix: dimension mismatch");
    if (kind == KernelKind::Linear) return a * b.transpose();

    require(bandwidth > 0.0, "kernel_matrix: Gaussian bandwidth must be positive");
    const double denom = 2.0 * bandwidth * bandwidth;
    Eigen::MatrixXd k(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j)
            k(i, j) = std::exp(-(a.row(i) - b.row(j)).squaredNorm() / denom);
    return k;
}

Eigen::MatrixXd double_center(const Eigen::MatrixXd& gram) {
    require(gram.rows() == gram.cols(), "double_center: Gram matrix must be square");
    const Eigen::RowVectorXd col_means = gram.colwise().mean();
    const Eigen::VectorXd row_means = gram.rowwise().mean();
    const double mean = gram.mean();
    Eigen::MatrixXd out = gram;
    out.rowwise() -= col_means;
    out.colwise() -= row_means;
    out.array() += mean;
    return 0.5 * (out + out.transpose());
}

KpcaModel kpca_fit(const Eigen::MatrixXd& samples, const KpcaOptions& options) {
    const Eigen::Index n = samples.rows();
    require(n >= 2, "kpca_fit: need at least two samples");
    require(samples.allFinite(), "kpca_fit: non-finite sample");
    require(options.components <= static_cast<std::size_t>(n),
            "kpca_fit: requested " + std::to_string(options.components) + " components from " +
                std::to_string(n) + " samples");
    require(options.components > 0 || (options.energy > 0.0 && options.energy <= 1.0),
            "kpca_fit: energy must lie in (0, 1]");

    bool identical = true;
    for (Eigen::Index i = 1; i < n && identical; ++i) identical = samples.row(i) == samples.row(0);
    require(!identical, "kpca_fit: all samples are identical");

    KpcaModel model;
    model.kernel = options.kernel;
    model.train = samples;
    if (options.kernel == KernelKind::Gaussian)
        model.bandwidth = options.bandwidth ? *options.bandwidth : mean_pairwise_distance(samples);

    const Eigen::MatrixXd gram = kernel_matrix(model.kernel, model.bandwidth, samples, samples);
    model.kernel_column_means = gram.colwise().mean();
    model.kernel_mean = gram.mean();
    const Eigen::MatrixXd centered = double_center(gram);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered);
    require(eig.info() == Eigen::Success, "kpca_fit: eigendecomposition failed");
    const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
    const double top = values(n - 1);
    const double cutoff = 1e-12 * std::max(1.0, top);

    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = n - 1; i >= 0; --i)
        if (values(i) > cutoff) keep.push_back(i);
    require(!keep.empty(), "kpca_fit: centered Gram matrix is zero");

    model.spectrum.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k)
        model.spectrum(static_cast<Eigen::Index>(k)) = values(keep[k]);

    std::size_t q = keep.size();
    if (options.components > 0) {
        q = std::min(q, options.components);
    } else if (options.energy < 1.0) {
        const double total = model.spectrum.sum();
        double running = 0.0;
        for (std::size_t k = 0; k < keep.size(); ++k) {
            running += model.spectrum(static_cast<Eigen::Index>(k));
            if (running >= options.energy * total * (1.0 - 1e-12)) {
                q = k + 1;
                break;
            }
        }
    }

    model.eigenvalues = model.spectrum.head(static_cast<Eigen::Index>(q));
    model.eigenvectors.resize(n, static_cast<Eigen::Index>(q));
    for (std::size_t k = 0; k < q; ++k) {
        Eigen::VectorXd v = eig.eigenvectors().col(keep[k]);
        // Sign convention: the largest-magnitude entry is positive.
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) v = -v;
        model.eigenvectors.col(static_cast<Eigen::Index>(k)) = v;
    }
    return model;
}

Eigen::MatrixXd kpca_transform(const KpcaModel& model, const Eigen::MatrixXd& samples) {
    require(samples.cols() == model.train.cols(),
            "kpca_transform: samples have " + std::to_string(samples.cols()) +
                " features, model expects " + std::to_string(model.train.cols()));
    Eigen::MatrixXd k = kernel_matrix(model.kernel, model.bandwidth, samples, model.train);
    const Eigen::VectorXd row_means = k.rowwise().mean();
    k.rowwise() -= model.kernel_column_means;
    k.colwise() -= row_means;
    k.array() += model.kernel_mean;

    const Eigen::VectorXd inv_sqrt = model.eigenvalues.array().rsqrt();
    return k * model.eigenvectors * inv_sqrt.asDiagonal();
}

Eigen::RowVectorXd column_means(const Eigen::MatrixXd& samples) {
    require(samples.rows() >= 1, "column_means: no samples");
    return samples.colwise().mean();
}

Eigen::MatrixXd center_rows(const Eigen::MatrixXd& samples, const Eigen::RowVectorXd& mean) {
    require(samples.cols() == mean.size(), "center_rows: dimension mismatch");
    Eigen::MatrixXd out = samples;
    out.rowwise() -= mean;
    return out;
}

Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& samples) {
    Eigen::MatrixXd out = samples;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double norm = out.row(i).norm();
        if (norm > 0.0) out.row(i) /= norm;
    }
    return out;
}

}  // namespace hmtml
