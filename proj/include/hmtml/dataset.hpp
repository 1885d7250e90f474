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

#include <cstdint>
#include <string>
#include <vector>

#include "hmtml/domain.hpp"

namespace hmtml {

/// Domains sharing one class vocabulary; class id c names class_names[c].
struct DomainSet {
    std::vector<DomainData> domains;
    std::vector<std::string> class_names;

    int num_classes() const noexcept { return static_cast<int>(class_names.size()); }
};

/// Reads one CSV per domain. Format: header `label,f1,...,fd`, then one
/// sample per line. Labels are strings mapped to class ids in sorted order;
/// every file must use the same label set. Throws IngestionError naming the
/// file and line on malformed input, NaN/inf values or label mismatch.
DomainSet load_domains(const std::vector<std::string>& paths);

/// Writes the CSV format read by load_domains, values with 17 significant
/// digits. `class_names` may be empty, in which case ids are written.
void save_domain_csv(const std::string& path, const DomainData& data,
                     const std::vector<std::string>& class_names = {});

/// Synthetic heterogeneous domains: class c has a latent Gaussian mean z_c,
/// domain m observes x = M_m z_c + noise * e + N_m xi with a seeded map M_m
/// whose entries lean nonnegative. The optional N_m xi term is low-rank
/// within-class variation private to each domain (xi ~ N(0, s^2 I_k)), the
/// kind of structure a learned metric can suppress and Euclidean 1-NN
/// cannot.
struct SynthSpec {
    int latent_dim = 5;
    std::vector<int> dims{12, 9, 7};
    int num_classes = 4;
    int per_class = 60;
    double noise = 1.0;
    /// Spread of the class means in latent space.
    double class_separation = 1.0;
    /// Rank k and scale s of the per-domain nuisance term; k = 0 disables it.
    int nuisance_dims = 0;
    double nuisance_scale = 0.0;
    /// Use the identity map wherever d_m == latent_dim.
    bool identity_maps = false;
    std::uint64_t seed = 0;
};

DomainSet synth_generate(const SynthSpec& spec);

struct LabeledSplit {
    /// Per domain, class-major: n labeled samples of class 0, then class 1, ...
    std::vector<DomainData> labeled;
    std::vector<DomainData> test;
    std::vector<std::vector<std::size_t>> labeled_indices;
    std::vector<std::vector<std::size_t>> test_indices;
};

/// Draws `per_class` labeled samples of every class in every domain; the
/// remaining samples form the test pool. Requires per_class * C <= N_m / 2.
LabeledSplit split_labeled(const std::vector<DomainData>& domains, int per_class,
                           std::uint64_t seed);

}  // namespace hmtml
