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

#include "hmtml/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "hmtml/error.hpp"
#include "hmtml/seeding.hpp"

namespace hmtml {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

struct RawDomain {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> rows;
    std::size_t dim = 0;
};

[[noreturn]] void fail(const std::string& path, std::size_t line, const std::string& what) {
    throw IngestionError(path + ":" + std::to_string(line) + ": " + what);
}

RawDomain read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError(path + ": cannot open file");

    RawDomain raw;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (!header) {
            if (fields.size() < 2 || fields[0] != "label")
                fail(path, lineno, "expected header 'label,f1,...,fd'");
            raw.dim = fields.size() - 1;
            header = true;
            continue;
        }
        if (fields.size() != raw.dim + 1)
            fail(path, lineno, "expected " + std::to_string(raw.dim + 1) + " fields, found " +
                                   std::to_string(fields.size()));
        if (fields[0].empty()) fail(path, lineno, "empty label");

        std::vector<double> row(raw.dim);
        for (std::size_t k = 0; k < raw.dim; ++k) {
            const auto f = fields[k + 1];
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (f.empty() || ec != std::errc() || ptr != f.data() + f.size())
                fail(path, lineno, "cannot parse value '" + std::string(f) + "' in column " +
                                       std::to_string(k + 2));
            if (!std::isfinite(v))
                fail(path, lineno, "non-finite value in column " + std::to_string(k + 2));
            row[k] = v;
        }
        raw.labels.emplace_back(fields[0]);
        raw.rows.push_back(std::move(row));
    }
    if (!header) throw IngestionError(path + ": missing header");
    if (raw.rows.empty()) throw IngestionError(path + ": no samples");
    return raw;
}

}  // namespace

DomainSet load_domains(const std::vector<std::string>& paths) {
    if (paths.empty()) throw IngestionError("no domain files given");

    std::vector<RawDomain> raws;
    for (const auto& p : paths) raws.push_back(read_csv(p));

    const std::set<std::string> vocab(raws.front().labels.begin(), raws.front().labels.end());
    for (std::size_t m = 1; m < raws.size(); ++m) {
        const std::set<std::string> other(raws[m].labels.begin(), raws[m].labels.end());
        if (other != vocab)
            throw IngestionError(paths[m] + ": label set differs from " + paths.front());
    }

    DomainSet set;
    set.class_names.assign(vocab.begin(), vocab.end());
    std::map<std::string, int> ids;
    for (std::size_t c = 0; c < set.class_names.size(); ++c) ids[set.class_names[c]] = static_cast<int>(c);

    for (std::size_t m = 0; m < raws.size(); ++m) {
        const auto& raw = raws[m];
        DomainData d;
        d.domain_id = static_cast<int>(m);
        d.num_classes = static_cast<int>(set.class_names.size());
        d.samples.resize(static_cast<Eigen::Index>(raw.rows.size()), static_cast<Eigen::Index>(raw.dim));
        for (std::size_t i = 0; i < raw.rows.size(); ++i) {
            for (std::size_t k = 0; k < raw.dim; ++k)
                d.samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = raw.rows[i][k];
            d.labels.push_back(ids.at(raw.labels[i]));
        }
        set.domains.push_back(std::move(d));
    }
    return set;
}

void save_domain_csv(const std::string& path, const DomainData& data,
                     const std::vector<std::string>& class_names) {
    data.validate();
    std::ofstream out(path);
    if (!out) throw IngestionError(path + ": cannot open for writing");
    out << "label";
    for (Eigen::Index k = 0; k < data.dim(); ++k) out << ",f" << (k + 1);
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int y = data.labels[i];
        if (class_names.empty())
            out << y;
        else
            out << class_names.at(static_cast<std::size_t>(y));
        for (Eigen::Index k = 0; k < data.dim(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", data.samples(static_cast<Eigen::Index>(i), k));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw IngestionError(path + ": write failed");
}

DomainSet synth_generate(const SynthSpec& spec) {
    require(spec.latent_dim >= 1, "synth: latent dimension must be >= 1");
    require(!spec.dims.empty(), "synth: need at least one domain");
    require(spec.num_classes >= 2, "synth: need at least two classes");
    require(spec.per_class >= 1, "synth: need at least one sample per class");
    require(spec.noise >= 0.0, "synth: noise must be nonnegative");
    require(spec.nuisance_dims >= 0 && spec.nuisance_scale >= 0.0,
            "synth: nuisance rank and scale must be nonnegative");
    for (int d : spec.dims) require(d >= 1, "synth: domain dimensions must be >= 1");

    const Eigen::Index latent = spec.latent_dim;
    std::normal_distribution<double> normal;

    std::mt19937_64 mean_rng(derive_seed(spec.seed, {0}));
    Eigen::MatrixXd means(latent, spec.num_classes);
    for (Eigen::Index c = 0; c < means.cols(); ++c)
        for (Eigen::Index i = 0; i < latent; ++i) means(i, c) = spec.class_separation * normal(mean_rng);

    DomainSet set;
    for (int c = 0; c < spec.num_classes; ++c) set.class_names.push_back("c" + std::to_string(c + 1));

    for (std::size_t m = 0; m < spec.dims.size(); ++m) {
        const Eigen::Index dim = spec.dims[m];
        Eigen::MatrixXd map(dim, latent);
        if (spec.identity_maps && dim == latent) {
            map.setIdentity();
        } else {
            std::mt19937_64 map_rng(derive_seed(spec.seed, {1, m}));
            std::bernoulli_distribution negative(0.2);
            const double scale = 1.0 / std::sqrt(static_cast<double>(latent));
            for (Eigen::Index j = 0; j < latent; ++j)
                for (Eigen::Index i = 0; i < dim; ++i) {
                    const double a = std::abs(normal(map_rng)) * scale;
                    map(i, j) = negative(map_rng) ? -a : a;
                }
        }

        // A zero scale leaves the sample stream untouched.
        const Eigen::Index k = spec.nuisance_scale > 0.0 ? spec.nuisance_dims : 0;
        Eigen::MatrixXd nuisance(dim, k);
        if (k > 0) {
            std::mt19937_64 nrng(derive_seed(spec.seed, {3, m}));
            const double scale = 1.0 / std::sqrt(static_cast<double>(k));
            for (Eigen::Index j = 0; j < k; ++j)
                for (Eigen::Index i = 0; i < dim; ++i) nuisance(i, j) = scale * normal(nrng);
        }

        std::mt19937_64 rng(derive_seed(spec.seed, {2, m}));
        Eigen::VectorXd xi(k);
        DomainData d;
        d.domain_id = static_cast<int>(m);
        d.num_classes = spec.num_classes;
        d.samples.resize(static_cast<Eigen::Index>(spec.num_classes) * spec.per_class, dim);
        Eigen::Index row = 0;
        for (int c = 0; c < spec.num_classes; ++c) {
            const Eigen::VectorXd center = map * means.col(c);
            for (int n = 0; n < spec.per_class; ++n, ++row) {
                for (Eigen::Index i = 0; i < dim; ++i)
                    d.samples(row, i) = center(i) + spec.noise * normal(rng);
                if (k > 0) {
                    for (Eigen::Index j = 0; j < k; ++j) xi(j) = spec.nuisance_scale * normal(rng);
                    d.samples.row(row) += (nuisance * xi).transpose();
                }
                d.labels.push_back(c);
            }
        }
        set.domains.push_back(std::move(d));
    }
    return set;
}

LabeledSplit split_labeled(const std::vector<DomainData>& domains, int per_class,
                           std::uint64_t seed) {
    require(!domains.empty(), "split_labeled: no domains");
    require(per_class >= 1, "split_labeled: need at least one labeled sample per class");

    LabeledSplit split;
    for (std::size_t m = 0; m < domains.size(); ++m) {
        const auto& d = domains[m];
        d.validate();
        const auto budget = static_cast<std::size_t>(per_class) * static_cast<std::size_t>(d.num_classes);
        require(2 * budget <= d.size(),
                "split_labeled: domain " + std::to_string(m) + " has " + std::to_string(d.size()) +
                    " samples, cannot label " + std::to_string(budget) + " (at most half)");

        std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(d.num_classes));
        for (std::size_t i = 0; i < d.size(); ++i)
            by_class[static_cast<std::size_t>(d.labels[i])].push_back(i);

        std::vector<std::size_t> labeled;
        std::vector<bool> taken(d.size(), false);
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            auto& pool = by_class[c];
            require(pool.size() >= static_cast<std::size_t>(per_class),
                    "split_labeled: class " + std::to_string(c) + " in domain " + std::to_string(m) +
                        " has fewer than " + std::to_string(per_class) + " samples");
            std::mt19937_64 rng(derive_seed(seed, {m, c}));
            // Partial Fisher-Yates on the class pool.
            for (std::size_t k = 0; k < static_cast<std::size_t>(per_class); ++k) {
                const std::size_t span = pool.size() - k;
                const std::size_t pick = k + static_cast<std::size_t>(rng() % span);
                std::swap(pool[k], pool[pick]);
                labeled.push_back(pool[k]);
                taken[pool[k]] = true;
            }
        }
        std::vector<std::size_t> test;
        for (std::size_t i = 0; i < d.size(); ++i)
            if (!taken[i]) test.push_back(i);

        split.labeled.push_back(d.subset(labeled));
        split.test.push_back(d.subset(test));
        split.labeled_indices.push_back(std::move(labeled));
        split.test_indices.push_back(std::move(test));
    }
    return split;
}

}  // namespace hmtml
