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

#include "hmtml/task_encoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "hmtml/error.hpp"
#include "hmtml/seeding.hpp"

namespace hmtml {

int num_tasks(int num_classes, double log_base) {
    require(num_classes >= 2, "num_tasks: need at least two classes");
    require(log_base > 1.0, "num_tasks: log base must exceed 1");
    const double length = 1.5 * std::log(static_cast<double>(num_classes)) / std::log(log_base);
    // log2 of a power of two is exact, but the change-of-base quotient may not be.
    const double rounded = std::round(length);
    const double ceiled = std::abs(length - rounded) < 1e-12 ? rounded : std::ceil(length);
    return 10 * static_cast<int>(ceiled);
}

std::size_t admissible_column_count(int num_classes) {
    if (num_classes < 2) return 0;
    constexpr auto cap = std::numeric_limits<std::size_t>::max();
    if (num_classes >= 40) return cap;
    std::size_t pow3 = 1;
    for (int i = 0; i < num_classes; ++i) pow3 *= 3;
    const std::size_t pow2 = std::size_t{1} << (num_classes + 1);
    return pow3 - pow2 + 1;
}

namespace {

using Column = std::vector<int>;

// Two raw bits per entry: 00/01 -> 0, 10 -> +1, 11 -> -1.
Column draw_column(int rows, std::mt19937_64& rng) {
    Column col(static_cast<std::size_t>(rows));
    std::uint64_t bits = 0;
    int remaining = 0;
    for (auto& v : col) {
        if (remaining == 0) {
            bits = rng();
            remaining = 32;
        }
        const auto b = static_cast<int>(bits & 3u);
        bits >>= 2;
        --remaining;
        v = b < 2 ? 0 : (b == 2 ? 1 : -1);
    }
    return col;
}

bool admissible(const Column& col) {
    const bool pos = std::find(col.begin(), col.end(), 1) != col.end();
    const bool neg = std::find(col.begin(), col.end(), -1) != col.end();
    return pos && neg;
}

constexpr int kColumnAttempts = 10000;
constexpr int kMatrixAttempts = 200;

}  // namespace

Codebook generate_codebook(int num_classes, int num_tasks, std::uint64_t seed) {
    require(num_classes >= 2, "generate_codebook: need at least two classes");
    require(num_tasks >= 1, "generate_codebook: need at least one task");

    const std::size_t pool = admissible_column_count(num_classes);
    std::mt19937_64 rng(seed);

    for (int attempt = 0; attempt < kMatrixAttempts; ++attempt) {
        std::set<Column> used;
        std::vector<Column> columns;
        columns.reserve(static_cast<std::size_t>(num_tasks));
        for (int p = 0; p < num_tasks; ++p) {
            const bool need_distinct = used.size() < pool;
            bool placed = false;
            for (int tries = 0; tries < kColumnAttempts; ++tries) {
                Column col = draw_column(num_classes, rng);
                if (!admissible(col)) continue;
                if (need_distinct && used.count(col) != 0) continue;
                used.insert(col);
                columns.push_back(std::move(col));
                placed = true;
                break;
            }
            if (!placed)
                throw GenerationFailure("generate_codebook: could not draw column " +
                                        std::to_string(p) + " for C=" +
                                        std::to_string(num_classes));
        }

        Codebook book;
        book.seed = seed;
        book.codes.resize(num_classes, num_tasks);
        for (int p = 0; p < num_tasks; ++p)
            for (int c = 0; c < num_classes; ++c)
                book.codes(c, p) = columns[static_cast<std::size_t>(p)][static_cast<std::size_t>(c)];

        bool rows_ok = true;
        for (int c = 0; c < num_classes && rows_ok; ++c)
            rows_ok = (book.codes.row(c).array() != 0).any();
        if (rows_ok) return book;
    }
    throw GenerationFailure("generate_codebook: some class row stayed all zero after " +
                            std::to_string(kMatrixAttempts) + " redraws (C=" +
                            std::to_string(num_classes) + ", P=" + std::to_string(num_tasks) + ")");
}

std::vector<std::string> codebook_violations(const Codebook& codebook) {
    std::vector<std::string> issues;
    const auto& codes = codebook.codes;
    for (Eigen::Index c = 0; c < codes.rows(); ++c) {
        if ((codes.row(c).array() == 0).all())
            issues.push_back("row " + std::to_string(c) + " is all zero");
    }
    std::set<Column> seen;
    bool repeated = false;
    for (Eigen::Index p = 0; p < codes.cols(); ++p) {
        Column col(static_cast<std::size_t>(codes.rows()));
        for (Eigen::Index c = 0; c < codes.rows(); ++c) {
            const int v = codes(c, p);
            if (v < -1 || v > 1)
                issues.push_back("entry (" + std::to_string(c) + "," + std::to_string(p) +
                                 ") outside {-1,0,1}");
            col[static_cast<std::size_t>(c)] = v;
        }
        if ((codes.col(p).array() == 0).all())
            issues.push_back("column " + std::to_string(p) + " is all zero");
        else if (!admissible(col))
            issues.push_back("column " + std::to_string(p) + " lacks a +1 or a -1");
        if (!seen.insert(col).second) repeated = true;
    }
    const std::size_t pool = admissible_column_count(static_cast<int>(codes.rows()));
    const auto cols = static_cast<std::size_t>(codes.cols());
    if (repeated && (cols <= pool || seen.size() < pool))
        issues.push_back("repeated column while distinct admissible columns remain");
    return issues;
}

Eigen::VectorXd train_linear_svm(const Eigen::MatrixXd& samples, const Eigen::VectorXd& targets,
                                 const SvmOptions& options) {
    require(samples.rows() == targets.size(), "train_linear_svm: sample/target count mismatch");
    require(samples.rows() >= 1, "train_linear_svm: no samples");
    require(options.penalty > 0.0, "train_linear_svm: penalty must be positive");

    const Eigen::Index n = samples.rows();
    const double upper = options.penalty;
    const Eigen::VectorXd diag = samples.rowwise().squaredNorm();
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(samples.cols());

    for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
        double max_pg = -std::numeric_limits<double>::infinity();
        double min_pg = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (diag(i) <= 0.0) continue;
            const double y = targets(i);
            const double grad = y * samples.row(i).dot(w) - 1.0;
            double pg = grad;
            if (alpha(i) <= 0.0)
                pg = std::min(grad, 0.0);
            else if (alpha(i) >= upper)
                pg = std::max(grad, 0.0);
            max_pg = std::max(max_pg, pg);
            min_pg = std::min(min_pg, pg);
            if (std::abs(pg) > 1e-14) {
                const double old = alpha(i);
                alpha(i) = std::clamp(old - grad / diag(i), 0.0, upper);
                w += (alpha(i) - old) * y * samples.row(i).transpose();
            }
        }
        if (!(max_pg - min_pg >= options.tolerance)) break;
    }
    return w;
}

DomainTaskWeights train_base_classifiers(const DomainData& data, const Codebook& codebook,
                                         const SvmOptions& options, std::uint64_t seed) {
    data.validate();
    require(data.num_classes <= codebook.num_classes(),
            "train_base_classifiers: codebook has fewer classes than the data");

    const int tasks = codebook.num_tasks();
    DomainTaskWeights out;
    out.weights = Eigen::MatrixXd::Zero(data.dim(), tasks);
    out.trainable.assign(static_cast<std::size_t>(tasks), false);
    out.replaced.assign(static_cast<std::size_t>(tasks), false);

    for (int p = 0; p < tasks; ++p) {
        std::vector<Eigen::Index> rows;
        std::vector<double> ys;
        bool pos = false;
        bool neg = false;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const int code = codebook.codes(data.labels[i], p);
            if (code == 0) continue;
            rows.push_back(static_cast<Eigen::Index>(i));
            ys.push_back(code);
            pos = pos || code > 0;
            neg = neg || code < 0;
        }
        if (!pos || !neg) continue;
        out.trainable[static_cast<std::size_t>(p)] = true;

        Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), data.dim());
        Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) {
            x.row(static_cast<Eigen::Index>(k)) = data.samples.row(rows[k]);
            y(static_cast<Eigen::Index>(k)) = ys[k];
        }
        Eigen::VectorXd w = train_linear_svm(x, y, options);
        const double norm = w.norm();
        if (norm > 1e-12) {
            w /= norm;
        } else {
            std::mt19937_64 rng(derive_seed(seed, {static_cast<std::uint64_t>(data.domain_id),
                                                   static_cast<std::uint64_t>(p)}));
            std::normal_distribution<double> normal;
            do {
                for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = normal(rng);
            } while (w.norm() < 1e-12);
            w.normalize();
            out.replaced[static_cast<std::size_t>(p)] = true;
        }
        out.weights.col(p) = w;
    }
    return out;
}

TaskWeights train_task_weights(std::span<const DomainData> domains, const Codebook& codebook,
                               const SvmOptions& options, std::uint64_t seed) {
    require(!domains.empty(), "train_task_weights: no domains");
    std::vector<DomainTaskWeights> trained;
    trained.reserve(domains.size());
    for (const auto& d : domains) trained.push_back(train_base_classifiers(d, codebook, options, seed));

    TaskWeights out;
    for (int p = 0; p < codebook.num_tasks(); ++p) {
        const bool ok = std::all_of(trained.begin(), trained.end(), [p](const DomainTaskWeights& t) {
            return t.trainable[static_cast<std::size_t>(p)];
        });
        (ok ? out.kept_columns : out.dropped_columns).push_back(p);
    }
    require(!out.kept_columns.empty(), "train_task_weights: no task is trainable in every domain");

    const auto kept = static_cast<Eigen::Index>(out.kept_columns.size());
    for (const auto& t : trained) {
        Eigen::MatrixXd w(t.weights.rows(), kept);
        std::vector<bool> replaced;
        for (Eigen::Index k = 0; k < kept; ++k) {
            const int p = out.kept_columns[static_cast<std::size_t>(k)];
            w.col(k) = t.weights.col(p);
            replaced.push_back(t.replaced[static_cast<std::size_t>(p)]);
        }
        out.per_domain.push_back(std::move(w));
        out.replaced.push_back(std::move(replaced));
    }
    return out;
}

}  // namespace hmtml
