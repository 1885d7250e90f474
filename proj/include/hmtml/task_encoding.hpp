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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hmtml/domain.hpp"

namespace hmtml {

/// Sparse ECOC code matrix, C x P with entries in {-1, 0, +1}.
///
/// Invariants: every column holds at least one +1 and one -1, no row is all
/// zero, and no two columns coincide as long as P does not exceed the number
/// of admissible columns (see admissible_column_count). Past that point
/// repeats are unavoidable and allowed only after every admissible column
/// has been used once.
struct Codebook {
    Eigen::MatrixXi codes;
    std::uint64_t seed = 0;

    int num_classes() const noexcept { return static_cast<int>(codes.rows()); }
    int num_tasks() const noexcept { return static_cast<int>(codes.cols()); }
};

/// P = 10 * ceil(1.5 * log_base(C)).
int num_tasks(int num_classes, double log_base = 2.0);

/// Number of distinct {-1,0,+1}^C columns with at least one +1 and one -1,
/// i.e. 3^C - 2^(C+1) + 1, saturated at SIZE_MAX.
std::size_t admissible_column_count(int num_classes);

/// Entries are 0 with probability 1/2 and +1 / -1 with probability 1/4 each.
/// Inadmissible or duplicate columns are redrawn; the whole matrix is redrawn
/// if a row comes out all zero. Throws GenerationFailure when the budget runs
/// out.
Codebook generate_codebook(int num_classes, int num_tasks, std::uint64_t seed);

/// Human-readable invariant violations; empty means the codebook is valid.
std::vector<std::string> codebook_violations(const Codebook& codebook);

struct SvmOptions {
    double penalty = 1.0;
    double tolerance = 1e-6;
    int max_epochs = 20000;
};

/// Linear SVM without bias: min_w 0.5 |w|^2 + penalty * sum_i max(0, 1 - y_i w^T x_i).
/// Solved by cyclic dual coordinate descent; stops when the projected-gradient
/// spread falls below the tolerance.
Eigen::VectorXd train_linear_svm(const Eigen::MatrixXd& samples, const Eigen::VectorXd& targets,
                                 const SvmOptions& options = {});

/// Weights of one domain, one column per codebook column.
struct DomainTaskWeights {
    Eigen::MatrixXd weights;
    /// Column p had both a +1 and a -1 side in this domain's data.
    std::vector<bool> trainable;
    /// Column p was degenerate (zero weights) and was replaced by a seeded
    /// random unit vector.
    std::vector<bool> replaced;
};

/// Trains one unit-norm base classifier per codebook column. Samples whose
/// class is coded 0 for a column are left out of that column's problem.
/// Untrainable columns are left as zero columns and flagged.
DomainTaskWeights train_base_classifiers(const DomainData& data, const Codebook& codebook,
                                         const SvmOptions& options, std::uint64_t seed);

/// Task weights for all domains with consistent columns.
struct TaskWeights {
    /// Per domain, d_m x P with unit-norm columns.
    std::vector<Eigen::MatrixXd> per_domain;
    /// Codebook column index of each kept task, in order.
    std::vector<int> kept_columns;
    /// Codebook columns dropped because some domain could not train them.
    std::vector<int> dropped_columns;
    /// replaced[m][p] for kept task p.
    std::vector<std::vector<bool>> replaced;

    std::size_t num_tasks() const noexcept { return kept_columns.size(); }
    std::size_t num_domains() const noexcept { return per_domain.size(); }
};

/// Trains every domain against the shared codebook and drops, in all domains,
/// any column that some domain cannot train. Throws InvalidInput if nothing
/// survives.
TaskWeights train_task_weights(std::span<const DomainData> domains, const Codebook& codebook,
                               const SvmOptions& options, std::uint64_t seed);

}  // namespace hmtml
