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

#include "hmtml/domain.hpp"

#include <string>

#include "hmtml/error.hpp"

namespace hmtml {

void DomainData::validate() const {
    require(static_cast<std::size_t>(samples.rows()) == labels.size(),
            "domain " + std::to_string(domain_id) + ": sample/label count mismatch");
    require(num_classes >= 1, "domain " + std::to_string(domain_id) + ": no classes");
    for (int y : labels)
        require(y >= 0 && y < num_classes,
                "domain " + std::to_string(domain_id) + ": label out of range");
    require(samples.allFinite(), "domain " + std::to_string(domain_id) + ": non-finite sample");
}

DomainData DomainData::subset(const std::vector<std::size_t>& indices) const {
    DomainData out;
    out.num_classes = num_classes;
    out.domain_id = domain_id;
    out.samples.resize(static_cast<Eigen::Index>(indices.size()), samples.cols());
    out.labels.reserve(indices.size());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        require(indices[k] < labels.size(), "subset index out of range");
        out.samples.row(static_cast<Eigen::Index>(k)) =
            samples.row(static_cast<Eigen::Index>(indices[k]));
        out.labels.push_back(labels[indices[k]]);
    }
    return out;
}

}  // namespace hmtml
