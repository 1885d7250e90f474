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

#include "hmtml/multilinear.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <string>

#include "hmtml/error.hpp"

namespace hmtml {

namespace {

std::size_t shape_volume(const DenseTensor::Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void check_shape(const DenseTensor::Shape& shape) {
    require(!shape.empty(), "tensor order must be >= 1");
    for (std::size_t extent : shape) require(extent >= 1, "tensor extents must be >= 1");
}

void check_mode(const DenseTensor& tensor, std::size_t mode) {
    require(mode < tensor.order(), "mode " + std::to_string(mode) + " out of range for order " +
                                       std::to_string(tensor.order()));
}

// Product of extents strictly before / after `mode`.
std::size_t leading(const DenseTensor::Shape& shape, std::size_t mode) {
    std::size_t n = 1;
    for (std::size_t k = 0; k < mode; ++k) n *= shape[k];
    return n;
}

std::size_t trailing(const DenseTensor::Shape& shape, std::size_t mode) {
    std::size_t n = 1;
    for (std::size_t k = mode + 1; k < shape.size(); ++k) n *= shape[k];
    return n;
}

}  // namespace

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(shape_volume(shape_), 0.0);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    require(data_.size() == shape_volume(shape_), "tensor data length does not match its shape");
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
    require(index.size() == shape_.size(), "index arity does not match tensor order");
    std::size_t off = 0;
    std::size_t stride = 1;
    for (std::size_t k = 0; k < shape_.size(); ++k) {
        require(index[k] < shape_[k], "tensor index out of range");
        off += index[k] * stride;
        stride *= shape_[k];
    }
    return off;
}

// With first-index-fastest storage, the offset decomposes as
// a + left * (i_m + I_m * b) where a ranges over the leading modes and b over
// the trailing ones. The Kolda column index is then a + left * b.
Matricization matricize(const DenseTensor& tensor, std::size_t mode) {
    check_mode(tensor, mode);
    const auto& shape = tensor.shape();
    const std::size_t left = leading(shape, mode);
    const std::size_t right = trailing(shape, mode);
    const std::size_t rows = shape[mode];

    Matricization out{mode, Eigen::MatrixXd(rows, left * right)};
    const auto data = tensor.data();
    for (std::size_t b = 0; b < right; ++b)
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t a = 0; a < left; ++a)
                out.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a + left * b)) =
                    data[a + left * (i + rows * b)];
    return out;
}

DenseTensor dematricize(const Matricization& unfolded, const DenseTensor::Shape& shape) {
    check_shape(shape);
    require(unfolded.mode < shape.size(), "matricization mode out of range for target shape");
    const std::size_t left = leading(shape, unfolded.mode);
    const std::size_t right = trailing(shape, unfolded.mode);
    const std::size_t rows = shape[unfolded.mode];
    require(static_cast<std::size_t>(unfolded.matrix.rows()) == rows &&
                static_cast<std::size_t>(unfolded.matrix.cols()) == left * right,
            "matricization size is inconsistent with target shape");

    DenseTensor out(shape);
    auto data = out.data();
    for (std::size_t b = 0; b < right; ++b)
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t a = 0; a < left; ++a)
                data[a + left * (i + rows * b)] = unfolded.matrix(
                    static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a + left * b));
    return out;
}

DenseTensor mode_product(const DenseTensor& tensor, const Eigen::MatrixXd& matrix,
                         std::size_t mode) {
    check_mode(tensor, mode);
    const auto& shape = tensor.shape();
    require(static_cast<std::size_t>(matrix.cols()) == shape[mode],
            "mode product: matrix has " + std::to_string(matrix.cols()) +
                " columns, tensor mode has extent " + std::to_string(shape[mode]));
    require(matrix.rows() >= 1, "mode product: matrix must have at least one row");

    const std::size_t left = leading(shape, mode);
    const std::size_t right = trailing(shape, mode);
    const std::size_t in_extent = shape[mode];
    const auto out_extent = static_cast<std::size_t>(matrix.rows());

    DenseTensor::Shape out_shape = shape;
    out_shape[mode] = out_extent;
    DenseTensor out(out_shape);

    const auto src = tensor.data();
    auto dst = out.data();
    for (std::size_t b = 0; b < right; ++b)
        for (std::size_t j = 0; j < out_extent; ++j)
            for (std::size_t i = 0; i < in_extent; ++i) {
                const double u = matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
                const double* s = src.data() + left * (i + in_extent * b);
                double* d = dst.data() + left * (j + out_extent * b);
                for (std::size_t a = 0; a < left; ++a) d[a] += s[a] * u;
            }
    return out;
}

DenseTensor multi_mode_product(const DenseTensor& tensor,
                               std::span<const Eigen::MatrixXd> matrices) {
    require(matrices.size() == tensor.order(), "multi-mode product needs one matrix per mode");
    DenseTensor out = tensor;
    for (std::size_t m = 0; m < matrices.size(); ++m) out = mode_product(out, matrices[m], m);
    return out;
}

DenseTensor contracted_mode_product(const DenseTensor& tensor, const Eigen::VectorXd& vector,
                                    std::size_t mode) {
    check_mode(tensor, mode);
    const auto& shape = tensor.shape();
    require(static_cast<std::size_t>(vector.size()) == shape[mode],
            "contracted product: vector length does not match mode extent");

    const std::size_t left = leading(shape, mode);
    const std::size_t right = trailing(shape, mode);
    const std::size_t extent = shape[mode];

    DenseTensor::Shape out_shape;
    for (std::size_t k = 0; k < shape.size(); ++k)
        if (k != mode) out_shape.push_back(shape[k]);
    if (out_shape.empty()) out_shape.push_back(1);

    DenseTensor out(out_shape);
    const auto src = tensor.data();
    auto dst = out.data();
    for (std::size_t b = 0; b < right; ++b)
        for (std::size_t i = 0; i < extent; ++i) {
            const double v = vector(static_cast<Eigen::Index>(i));
            for (std::size_t a = 0; a < left; ++a)
                dst[a + left * b] += src[a + left * (i + extent * b)] * v;
        }
    return out;
}

double frobenius_norm_sq(const DenseTensor& tensor) {
    double sum = 0.0;
    for (double v : tensor.data()) sum += v * v;
    return sum;
}

double inner_product(const DenseTensor& a, const DenseTensor& b) {
    require(a.shape() == b.shape(), "inner product: shape mismatch");
    double sum = 0.0;
    const auto x = a.data();
    const auto y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
    return sum;
}

DenseTensor identity_tensor(std::size_t rank, std::size_t order) {
    require(rank >= 1, "identity tensor: rank must be >= 1");
    require(order >= 2, "identity tensor: order must be >= 2");
    DenseTensor out(DenseTensor::Shape(order, rank));
    std::vector<std::size_t> index(order);
    for (std::size_t i = 0; i < rank; ++i) {
        std::fill(index.begin(), index.end(), i);
        out(index) = 1.0;
    }
    return out;
}

DenseTensor rank1_tensor(std::span<const Eigen::VectorXd> vectors) {
    require(vectors.size() >= 2, "rank-1 tensor needs at least two vectors");
    DenseTensor::Shape shape;
    for (const auto& v : vectors) {
        require(v.size() >= 1, "rank-1 tensor: vectors must be nonempty");
        shape.push_back(static_cast<std::size_t>(v.size()));
    }

    // Build by repeated outer product, extending one mode at a time; the
    // first-index-fastest layout means the new mode is the slowest.
    std::vector<double> data(vectors[0].data(), vectors[0].data() + vectors[0].size());
    for (std::size_t m = 1; m < vectors.size(); ++m) {
        std::vector<double> next;
        next.reserve(data.size() * static_cast<std::size_t>(vectors[m].size()));
        for (Eigen::Index i = 0; i < vectors[m].size(); ++i)
            for (double x : data) next.push_back(x * vectors[m](i));
        data = std::move(next);
    }
    return DenseTensor(std::move(shape), std::move(data));
}

DenseTensor operator-(const DenseTensor& a, const DenseTensor& b) {
    require(a.shape() == b.shape(), "tensor difference: shape mismatch");
    std::vector<double> data(a.size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = a.data()[i] - b.data()[i];
    return DenseTensor(a.shape(), std::move(data));
}

}  // namespace hmtml
