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
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hmtml {

/// Dense M-way array of doubles.
///
/// Storage is first-index-fastest: the entry at multi-index (i_0, ..., i_{M-1})
/// lives at offset sum_k i_k * prod_{l<k} I_l. Modes are 0-based throughout.
///
/// This type is only used for small tensors (oracle checks, tests); the
/// solver never builds the prod_m d_m coupling tensors.
class DenseTensor {
public:
    using Shape = std::vector<std::size_t>;

    /// Zero tensor of the given shape. Every extent must be >= 1.
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, std::vector<double> data);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t order() const noexcept { return shape_.size(); }
    std::size_t extent(std::size_t mode) const { return shape_.at(mode); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    std::size_t offset(std::span<const std::size_t> index) const;

    double& operator()(std::span<const std::size_t> index) { return data_[offset(index)]; }
    double operator()(std::span<const std::size_t> index) const { return data_[offset(index)]; }
    double& operator()(std::initializer_list<std::size_t> index) {
        return (*this)(std::span<const std::size_t>(index.begin(), index.size()));
    }
    double operator()(std::initializer_list<std::size_t> index) const {
        return (*this)(std::span<const std::size_t>(index.begin(), index.size()));
    }

    friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

/// Mode-m unfolding: an I_m x prod_{k!=m} I_k matrix.
struct Matricization {
    std::size_t mode = 0;
    Eigen::MatrixXd matrix;
};

/// Column index follows the Kolda convention: for the remaining modes in
/// increasing order, j = sum_{k!=m} i_k * prod_{l<k, l!=m} I_l.
Matricization matricize(const DenseTensor& tensor, std::size_t mode);
DenseTensor dematricize(const Matricization& unfolded, const DenseTensor::Shape& shape);

/// B = T x_m U, with U of size J x I_m. The result has extent J on mode m.
DenseTensor mode_product(const DenseTensor& tensor, const Eigen::MatrixXd& matrix,
                         std::size_t mode);

/// T x_0 U_0 x_1 U_1 ... x_{M-1} U_{M-1}; one matrix per mode.
DenseTensor multi_mode_product(const DenseTensor& tensor,
                               std::span<const Eigen::MatrixXd> matrices);

/// Contracts mode m against a vector of length I_m. The order drops by one;
/// contracting an order-1 tensor yields a single-entry tensor of shape {1}.
DenseTensor contracted_mode_product(const DenseTensor& tensor, const Eigen::VectorXd& vector,
                                    std::size_t mode);

double frobenius_norm_sq(const DenseTensor& tensor);
double inner_product(const DenseTensor& a, const DenseTensor& b);

/// r x r x ... x r superdiagonal tensor with ones at (i, ..., i).
DenseTensor identity_tensor(std::size_t rank, std::size_t order);

/// Outer product w_0 o w_1 o ... o w_{M-1}.
DenseTensor rank1_tensor(std::span<const Eigen::VectorXd> vectors);

DenseTensor operator-(const DenseTensor& a, const DenseTensor& b);

}  // namespace hmtml
