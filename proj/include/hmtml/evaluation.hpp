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

#include <vector>

#include <Eigen/Dense>

namespace hmtml {

double accuracy(const std::vector<int>& predictions, const std::vector<int>& truth);

/// C x C counts, rows = true class, columns = predicted class.
Eigen::MatrixXi confusion_matrix(const std::vector<int>& predictions, const std::vector<int>& truth,
                                 int num_classes);

/// Unweighted mean of per-class F1 = 2PR / (P + R). A class whose F1 is
/// undefined (no true and no predicted occurrences, or P = R = 0)
/// contributes 0.
double macro_f1(const std::vector<int>& predictions, const std::vector<int>& truth, int num_classes);

}  // namespace hmtml
