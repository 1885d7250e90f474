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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hmtml/dataset.hpp"
#include "hmtml/optimizer.hpp"
#include "hmtml/pairs_loss.hpp"
#include "hmtml/preprocess.hpp"
#include "hmtml/task_encoding.hpp"

namespace hmtml {

/// Learned-metric variants. Euclidean is the no-learning baseline.
enum class Method { Hmtml, Euclidean, DropLoss, DropReg, FrobeniusReg, NoNonneg };

std::string method_name(Method method);
/// Accepts the names written by method_name ("HMTML", "EU", "loss0",
/// "reg0", "fnorm", "noconstr"). Throws InvalidInput otherwise.
Method parse_method(const std::string& name);
/// Ablation flags of a learned variant; Euclidean has none.
AblationFlags method_flags(Method method);

/// {10^lo, ..., 10^hi}.
std::vector<double> power_grid(int lo, int hi);

struct ExperimentConfig {
    /// Exactly one of the two data sources is used; paths win when nonempty.
    std::optional<SynthSpec> synth;
    std::vector<std::string> paths;

    int labels_per_class = 5;
    std::vector<int> ranks{5};
    std::vector<double> gamma_grid = power_grid(-5, 4);
    std::vector<double> gamma_m_grid = power_grid(-5, 4);
    int repetitions = 1;
    std::uint64_t seed = 0;

    /// Learned methods to run besides the Euclidean baseline.
    std::vector<Method> methods{Method::Hmtml};

    HmtmlConfig solver;
    SvmOptions svm;
    PairOptions pairs;
    /// KPCA per domain, fitted on that domain's full sample pool before
    /// splitting.
    std::optional<KpcaOptions> kpca;
    /// Subtract the labeled-set mean of each domain (applied to labeled
    /// and test samples alike).
    bool center = true;
    /// Scale every sample to unit norm after centering.
    bool normalize = false;
    int neighbors = 1;

    void validate() const;
};

/// One labeled/test split after preprocessing, with the ECOC task weights
/// trained on the labeled part.
struct PreparedRun {
    std::vector<DomainData> labeled;
    std::vector<DomainData> test;
    Codebook codebook;
    TaskWeights tasks;
    HmtmlProblem problem;
};

/// Counts gathered over every fit the harness performs.
struct FitLog {
    int fits = 0;
    int max_outer = 0;
    int max_inner = 0;
    int max_checks = 0;
    /// Fits whose objective trace rose by more than 1e-10 between sweeps.
    int nonmonotone = 0;
    /// Fits ending with a negative entry while projection was active.
    int negative = 0;
    int warnings = 0;

    void record(const SolverState& state, const HmtmlConfig& config);
    void merge(const FitLog& other);
};

/// Builds the ECOC tasks and pair sets for already-preprocessed domains.
PreparedRun prepare_run(std::vector<DomainData> labeled, std::vector<DomainData> test,
                        const ExperimentConfig& config, std::uint64_t seed);

/// Fold f holds out the f-th labeled sample of every class. Labeled sets
/// must be class-major with the same count per class (as split_labeled
/// produces).
struct Fold {
    std::vector<DomainData> train;
    std::vector<DomainData> holdout;
};
Fold make_fold(const std::vector<DomainData>& labeled, int per_class, int fold);

struct Selection {
    double gamma = 0.0;
    double gamma_m = 0.0;
    /// Held-out samples classified correctly, summed over domains and folds.
    long correct = 0;
    long total = 0;
    /// Grid points at which some fold diverged (scored as zero there).
    int divergent_points = 0;
};

/// Leave-one-out selection of (gamma, gamma_m) on the product grid. The
/// returned point maximizes the held-out 1-NN accuracy pooled over domains
/// and folds; ties go to the smaller gamma, then the smaller gamma_m.
/// Under drop_reg the gamma grid collapses to {0}.
Selection loocv_select(const std::vector<DomainData>& labeled, const ExperimentConfig& config,
                       const HmtmlConfig& solver, std::uint64_t seed, FitLog* log = nullptr);

struct MethodScores {
    std::vector<double> accuracy;  ///< per domain
    std::vector<double> macro_f1;  ///< per domain
    std::optional<SolverState> state;

    double mean_accuracy() const;
    double mean_macro_f1() const;
};

/// 1-NN on every domain's test pool with the given metric factors; empty
/// factors mean the Euclidean metric.
MethodScores score_metrics(const std::vector<DomainData>& labeled,
                           const std::vector<DomainData>& test,
                           const std::vector<FactorMatrix>& factors, int neighbors);

/// Fits with the given solver settings and scores the learned metrics.
MethodScores evaluate_method(const PreparedRun& run, const HmtmlConfig& solver, int neighbors,
                             FitLog* log = nullptr);

struct Summary {
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation, 0 for a single value
    int count = 0;
};
Summary summarize(const std::vector<double>& values);

/// One (method, rank) row group. `domain_*[m]` holds one value per
/// successful repetition.
struct ResultCell {
    Method method = Method::Hmtml;
    int rank = 0;  ///< 0 for the Euclidean baseline
    int labels_per_class = 0;
    std::vector<std::vector<double>> domain_accuracy;
    std::vector<std::vector<double>> domain_macro_f1;
    std::vector<double> average_accuracy;
    std::vector<double> average_macro_f1;
    std::vector<Selection> selections;
    int failures = 0;
    std::vector<std::string> failure_messages;
};

struct ResultTable {
    int num_domains = 0;
    int repetitions = 0;
    std::vector<ResultCell> cells;
    FitLog fit_log;

    const ResultCell* find(Method method, int rank) const;
};

/// Domains of the configured source, with KPCA applied when requested.
std::vector<DomainData> experiment_domains(const ExperimentConfig& config);

/// Labeled/test split of repetition `rep`, centered and normalized as
/// configured. This is exactly the split run_experiment scores.
LabeledSplit repetition_split(const std::vector<DomainData>& domains, const ExperimentConfig& config,
                              int rep);

/// Full protocol: for each repetition split, preprocess, train ECOC tasks,
/// select hyperparameters by LOOCV, fit, and score 1-NN per domain.
ResultTable run_experiment(const ExperimentConfig& config);

/// Deterministic CSV: method,rank,labels,domain,acc_mean,acc_std,f1_mean,
/// f1_std,runs,failures with domain = 1..M or "avg". Missing values are
/// written as "NA".
void write_results_csv(std::ostream& out, const ResultTable& table);
/// Average accuracy and macroF1 per (rank, method), one line each.
void write_curve_csv(std::ostream& out, const ResultTable& table);

}  // namespace hmtml
