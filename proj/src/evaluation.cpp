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

#include "hmtml/evaluation.hpp"

#include "hmtml/error.hpp"

namespace hmtml {

double accuracy(const std::vector<int>& predictions, const std::vector<int>& truth) {
    require(predictions.size() == truth.size(), "accuracy: length mismatch");
    require(!truth.empty(), "accuracy: no samples");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) correct += predictions[i] == truth[i] ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(truth.size());
}

Eigen::MatrixXi confusion_matrix(const std::vector<int>& predictions, const std::vector<int>& truth,
                                 int num_classes) {
    require(predictions.size() == truth.size(), "confusion_matrix: length mismatch");
    require(num_classes >= 1, "confusion_matrix: need at least one class");
    Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(num_classes, num_classes);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        require(truth[i] >= 0 && truth[i] < num_classes && predictions[i] >= 0 &&
                    predictions[i] < num_classes,
                "confusion_matrix: label out of range");
        ++counts(truth[i], predictions[i]);
    }
    return counts;
}

double macro_f1(const std::vector<int>& predictions, const std::vector<int>& truth, int num_classes) {
    const Eigen::MatrixXi counts = confusion_matrix(predictions, truth, num_classes);
    double sum = 0.0;
    for (int c = 0; c < num_classes; ++c) {
        const int tp = counts(c, c);
        const int predicted = counts.col(c).sum();
        const int actual = counts.row(c).sum();
        // 2PR / (P + R) == 2 tp / (predicted + actual).
        if (tp > 0) sum += 2.0 * tp / static_cast<double>(predicted + actual);
    }
    return sum / num_classes;
}

}  // namespace hmtml
