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
#include <vector>

#include <Eigen/Dense>

namespace hmtml {

/// d_m x r factor of the metric A_m = U_m U_m^T.
using FactorMatrix = Eigen::MatrixXd;

/// Labeled samples of one domain.
///
/// Rows of `samples` are observations. Class ids are 0-based, in
/// [0, num_classes); every domain of a problem shares the same class set.
struct DomainData {
    Eigen::MatrixXd samples;
    std::vector<int> labels;
    int num_classes = 0;
    int domain_id = 0;

    std::size_t size() const noexcept { return labels.size(); }
    Eigen::Index dim() const noexcept { return samples.cols(); }

    /// Checks shape agreement, label range and finiteness. Throws InvalidInput.
    void validate() const;

    /// Rows selected by `indices`, in that order.
    DomainData subset(const std::vector<std::size_t>& indices) const;
};

}  // namespace hmtml
