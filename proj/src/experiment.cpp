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

#include "hmtml/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "hmtml/error.hpp"
#include "hmtml/evaluation.hpp"
#include "hmtml/metric_model.hpp"
#include "hmtml/seeding.hpp"

namespace hmtml {

std::string method_name(Method method) {
    switch (method) {
        case Method::Hmtml: return "HMTML";
        case Method::Euclidean: return "EU";
        case Method::DropLoss: return "loss0";
        case Method::DropReg: return "reg0";
        case Method::FrobeniusReg: return "fnorm";
        case Method::NoNonneg: return "noconstr";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    for (Method m : {Method::Hmtml, Method::Euclidean, Method::DropLoss, Method::DropReg,
                     Method::FrobeniusReg, Method::NoNonneg})
        if (method_name(m) == name) return m;
    throw InvalidInput("unknown method '" + name + "' (expected HMTML, EU, loss0, reg0, fnorm, noconstr)");
}

AblationFlags method_flags(Method method) {
    AblationFlags f;
    f.drop_loss = method == Method::DropLoss;
    f.drop_reg = method == Method::DropReg;
    f.frobenius_reg = method == Method::FrobeniusReg;
    f.no_nonneg = method == Method::NoNonneg;
    return f;
}

std::vector<double> power_grid(int lo, int hi) {
    require(lo <= hi, "power_grid: empty range");
    std::vector<double> grid;
    for (int i = lo; i <= hi; ++i) grid.push_back(std::pow(10.0, i));
    return grid;
}

void ExperimentConfig::validate() const {
    require(!paths.empty() || synth.has_value(), "experiment: no data source (paths or synth spec)");
    require(labels_per_class >= 2, "experiment: leave-one-out selection needs at least 2 labels per class");
    require(!ranks.empty(), "experiment: rank grid is empty");
    for (int r : ranks) require(r >= 1, "experiment: ranks must be >= 1");
    require(!gamma_grid.empty() && !gamma_m_grid.empty(), "experiment: hyperparameter grids must be nonempty");
    for (double g : gamma_grid) require(std::isfinite(g) && g >= 0.0, "experiment: gamma values must be >= 0");
    for (double g : gamma_m_grid) require(std::isfinite(g) && g >= 0.0, "experiment: gamma_m values must be >= 0");
    require(repetitions >= 1, "experiment: repetitions must be >= 1");
    require(neighbors >= 1, "experiment: neighbors must be >= 1");
    for (Method m : methods)
        require(m != Method::Euclidean, "experiment: the Euclidean baseline is always reported; do not list it");
    solver.validate();
}

void FitLog::record(const SolverState& state, const HmtmlConfig& config) {
    ++fits;
    max_outer = std::max(max_outer, state.outer_iterations);
    for (int s : state.inner_steps) max_inner = std::max(max_inner, s);
    for (int c : state.step_checks) max_checks = std::max(max_checks, c);
    const auto& trace = state.objective_trace;
    for (std::size_t k = 1; k < trace.size(); ++k)
        if (trace[k] > trace[k - 1] + 1e-10) {
            ++nonmonotone;
            break;
        }
    if (!config.ablation.no_nonneg)
        for (const auto& u : state.factors)
            if ((u.array() < 0.0).any()) {
                ++negative;
                break;
            }
    warnings += static_cast<int>(state.warnings.size());
}

void FitLog::merge(const FitLog& other) {
    fits += other.fits;
    max_outer = std::max(max_outer, other.max_outer);
    max_inner = std::max(max_inner, other.max_inner);
    max_checks = std::max(max_checks, other.max_checks);
    nonmonotone += other.nonmonotone;
    negative += other.negative;
    warnings += other.warnings;
}

PreparedRun prepare_run(std::vector<DomainData> labeled, std::vector<DomainData> test,
                        const ExperimentConfig& config, std::uint64_t seed) {
    require(!labeled.empty() && labeled.size() == test.size(), "prepare_run: domain count mismatch");
    PreparedRun run;
    run.labeled = std::move(labeled);
    run.test = std::move(test);
    const int classes = run.labeled.front().num_classes;
    run.codebook = generate_codebook(classes, num_tasks(classes), derive_seed(seed, {1}));
    run.tasks = train_task_weights(run.labeled, run.codebook, config.svm, derive_seed(seed, {2}));
    PairOptions pairs = config.pairs;
    pairs.seed = derive_seed(seed, {3});
    run.problem = make_problem(run.labeled, run.tasks, pairs);
    return run;
}

Fold make_fold(const std::vector<DomainData>& labeled, int per_class, int fold) {
    require(per_class >= 2, "make_fold: need at least 2 labeled samples per class");
    require(fold >= 0 && fold < per_class, "make_fold: fold index out of range");
    Fold out;
    for (const auto& d : labeled) {
        const auto n = static_cast<std::size_t>(per_class);
        require(d.size() == n * static_cast<std::size_t>(d.num_classes),
                "make_fold: labeled set is not class-balanced");
        std::vector<std::size_t> train, hold;
        for (std::size_t i = 0; i < d.size(); ++i) {
            require(d.labels[i] == static_cast<int>(i / n), "make_fold: labeled set is not class-major");
            (i % n == static_cast<std::size_t>(fold) ? hold : train).push_back(i);
        }
        out.train.push_back(d.subset(train));
        out.holdout.push_back(d.subset(hold));
    }
    return out;
}

namespace {

long count_correct(const std::vector<DomainData>& train, const std::vector<DomainData>& queries,
                   const std::vector<FactorMatrix>& factors, int neighbors) {
    long correct = 0;
    for (std::size_t m = 0; m < train.size(); ++m) {
        const Metric metric = Metric::from_factor(factors[m]);
        const auto pred = knn_predict(train[m], queries[m].samples, metric, neighbors);
        for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == queries[m].labels[i] ? 1 : 0;
    }
    return correct;
}

std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

Selection loocv_select(const std::vector<DomainData>& labeled, const ExperimentConfig& config,
                       const HmtmlConfig& solver, std::uint64_t seed, FitLog* log) {
    require(config.labels_per_class >= 2, "loocv_select: need at least 2 labeled samples per class");
    const auto gammas = solver.ablation.drop_reg ? std::vector<double>{0.0} : sorted_unique(config.gamma_grid);
    const auto gammas_m = sorted_unique(config.gamma_m_grid);
    require(!gammas.empty() && !gammas_m.empty(), "loocv_select: empty grid");

    const std::size_t points = gammas.size() * gammas_m.size();
    std::vector<long> correct(points, 0);
    std::vector<bool> diverged(points, false);
    long total = 0;

    for (int f = 0; f < config.labels_per_class; ++f) {
        Fold fold = make_fold(labeled, config.labels_per_class, f);
        for (const auto& h : fold.holdout) total += static_cast<long>(h.size());
        const PreparedRun run =
            prepare_run(std::move(fold.train), std::move(fold.holdout), config,
                        derive_seed(seed, {static_cast<std::uint64_t>(f)}));
        for (std::size_t a = 0; a < gammas.size(); ++a)
            for (std::size_t b = 0; b < gammas_m.size(); ++b) {
                HmtmlConfig cfg = solver;
                cfg.gamma = gammas[a];
                cfg.gamma_m = gammas_m[b];
                const std::size_t idx = a * gammas_m.size() + b;
                try {
                    const SolverState state = fit(run.problem, cfg);
                    if (log) log->record(state, cfg);
                    correct[idx] += count_correct(run.labeled, run.test, state.factors, config.neighbors);
                } catch (const SolverDivergence&) {
                    diverged[idx] = true;
                }
            }
    }

    Selection best;
    best.total = total;
    best.correct = -1;
    for (std::size_t a = 0; a < gammas.size(); ++a)
        for (std::size_t b = 0; b < gammas_m.size(); ++b) {
            const std::size_t idx = a * gammas_m.size() + b;
            if (diverged[idx]) ++best.divergent_points;
            // Strict improvement keeps the earliest (smallest) point on ties.
            if (correct[idx] > best.correct) {
                best.correct = correct[idx];
                best.gamma = gammas[a];
                best.gamma_m = gammas_m[b];
            }
        }
    return best;
}

double MethodScores::mean_accuracy() const {
    double s = 0.0;
    for (double a : accuracy) s += a;
    return accuracy.empty() ? 0.0 : s / static_cast<double>(accuracy.size());
}

double MethodScores::mean_macro_f1() const {
    double s = 0.0;
    for (double a : macro_f1) s += a;
    return macro_f1.empty() ? 0.0 : s / static_cast<double>(macro_f1.size());
}

MethodScores score_metrics(const std::vector<DomainData>& labeled, const std::vector<DomainData>& test,
                           const std::vector<FactorMatrix>& factors, int neighbors) {
    require(labeled.size() == test.size(), "score_metrics: domain count mismatch");
    require(factors.empty() || factors.size() == labeled.size(), "score_metrics: one factor per domain required");
    MethodScores scores;
    for (std::size_t m = 0; m < labeled.size(); ++m) {
        const Metric metric =
            factors.empty() ? Metric::identity(labeled[m].dim()) : Metric::from_factor(factors[m]);
        const auto pred = knn_predict(labeled[m], test[m].samples, metric, neighbors);
        scores.accuracy.push_back(accuracy(pred, test[m].labels));
        scores.macro_f1.push_back(macro_f1(pred, test[m].labels, test[m].num_classes));
    }
    return scores;
}

MethodScores evaluate_method(const PreparedRun& run, const HmtmlConfig& solver, int neighbors, FitLog* log) {
    SolverState state = fit(run.problem, solver);
    if (log) log->record(state, solver);
    MethodScores scores = score_metrics(run.labeled, run.test, state.factors, neighbors);
    scores.state = std::move(state);
    return scores;
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    s.count = static_cast<int>(values.size());
    if (values.empty()) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

const ResultCell* ResultTable::find(Method method, int rank) const {
    for (const auto& c : cells)
        if (c.method == method && (method == Method::Euclidean || c.rank == rank)) return &c;
    return nullptr;
}

namespace {

void add_scores(ResultCell& cell, const MethodScores& scores) {
    for (std::size_t m = 0; m < scores.accuracy.size(); ++m) {
        cell.domain_accuracy[m].push_back(scores.accuracy[m]);
        cell.domain_macro_f1[m].push_back(scores.macro_f1[m]);
    }
    cell.average_accuracy.push_back(scores.mean_accuracy());
    cell.average_macro_f1.push_back(scores.mean_macro_f1());
}

}  // namespace

std::vector<DomainData> experiment_domains(const ExperimentConfig& config) {
    require(!config.paths.empty() || config.synth.has_value(), "experiment: no data source");
    DomainSet set = !config.paths.empty() ? load_domains(config.paths) : synth_generate(*config.synth);
    if (config.kpca)
        for (auto& d : set.domains) {
            const KpcaModel model = kpca_fit(d.samples, *config.kpca);
            d.samples = kpca_transform(model, d.samples);
        }
    return std::move(set.domains);
}

LabeledSplit repetition_split(const std::vector<DomainData>& domains, const ExperimentConfig& config,
                              int rep) {
    const std::uint64_t rep_seed = derive_seed(config.seed, {static_cast<std::uint64_t>(rep)});
    LabeledSplit split = split_labeled(domains, config.labels_per_class, derive_seed(rep_seed, {0}));
    for (std::size_t m = 0; m < domains.size(); ++m) {
        if (config.center) {
            const Eigen::RowVectorXd mean = column_means(split.labeled[m].samples);
            split.labeled[m].samples = center_rows(split.labeled[m].samples, mean);
            split.test[m].samples = center_rows(split.test[m].samples, mean);
        }
        if (config.normalize) {
            split.labeled[m].samples = normalize_rows(split.labeled[m].samples);
            split.test[m].samples = normalize_rows(split.test[m].samples);
        }
    }
    return split;
}

ResultTable run_experiment(const ExperimentConfig& config) {
    config.validate();
    const std::vector<DomainData> domains = experiment_domains(config);

    ResultTable table;
    table.num_domains = static_cast<int>(domains.size());
    table.repetitions = config.repetitions;
    auto new_cell = [&](Method method, int rank) {
        ResultCell c;
        c.method = method;
        c.rank = rank;
        c.labels_per_class = config.labels_per_class;
        c.domain_accuracy.resize(domains.size());
        c.domain_macro_f1.resize(domains.size());
        table.cells.push_back(std::move(c));
    };
    new_cell(Method::Euclidean, 0);
    for (int r : config.ranks)
        for (Method m : config.methods) new_cell(m, r);

    for (int rep = 0; rep < config.repetitions; ++rep) {
        const std::uint64_t rep_seed = derive_seed(config.seed, {static_cast<std::uint64_t>(rep)});
        LabeledSplit split = repetition_split(domains, config, rep);

        add_scores(table.cells.front(), score_metrics(split.labeled, split.test, {}, config.neighbors));

        std::optional<PreparedRun> run;
        std::string prepare_error;
        try {
            run = prepare_run(split.labeled, split.test, config, derive_seed(rep_seed, {1}));
        } catch (const GenerationFailure& e) {
            prepare_error = e.what();
        }

        for (std::size_t c = 1; c < table.cells.size(); ++c) {
            ResultCell& cell = table.cells[c];
            if (!run) {
                ++cell.failures;
                cell.failure_messages.push_back("repetition " + std::to_string(rep) + ": " + prepare_error);
                continue;
            }
            HmtmlConfig solver = config.solver;
            solver.rank = cell.rank;
            solver.ablation = method_flags(cell.method);
            solver.seed = derive_seed(rep_seed, {2});
            try {
                const Selection sel = loocv_select(run->labeled, config, solver, derive_seed(rep_seed, {3}),
                                                   &table.fit_log);
                solver.gamma = sel.gamma;
                solver.gamma_m = sel.gamma_m;
                add_scores(cell, evaluate_method(*run, solver, config.neighbors, &table.fit_log));
                cell.selections.push_back(sel);
            } catch (const SolverDivergence& e) {
                ++cell.failures;
                cell.failure_messages.push_back("repetition " + std::to_string(rep) + ": " + e.what());
            }
        }
    }
    return table;
}

namespace {

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void write_summary_pair(std::ostream& out, const std::vector<double>& acc, const std::vector<double>& f1) {
    const Summary a = summarize(acc), f = summarize(f1);
    if (a.count == 0) {
        out << "NA,NA,NA,NA";
        return;
    }
    out << fixed(a.mean) << ',' << fixed(a.std) << ',' << fixed(f.mean) << ',' << fixed(f.std);
}

}  // namespace

void write_results_csv(std::ostream& out, const ResultTable& table) {
    out << "method,rank,labels,domain,acc_mean,acc_std,f1_mean,f1_std,runs,failures\n";
    for (const auto& cell : table.cells) {
        const std::string prefix =
            method_name(cell.method) + ',' + std::to_string(cell.rank) + ',' + std::to_string(cell.labels_per_class) + ',';
        const auto runs = cell.average_accuracy.size();
        for (int m = 0; m < table.num_domains; ++m) {
            out << prefix << (m + 1) << ',';
            write_summary_pair(out, cell.domain_accuracy[static_cast<std::size_t>(m)],
                               cell.domain_macro_f1[static_cast<std::size_t>(m)]);
            out << ',' << runs << ',' << cell.failures << '\n';
        }
        out << prefix << "avg,";
        write_summary_pair(out, cell.average_accuracy, cell.average_macro_f1);
        out << ',' << runs << ',' << cell.failures << '\n';
    }
}

void write_curve_csv(std::ostream& out, const ResultTable& table) {
    out << "rank,method,acc_mean,acc_std,f1_mean,f1_std\n";
    const ResultCell* eu = table.find(Method::Euclidean, 0);
    std::vector<int> ranks;
    for (const auto& c : table.cells)
        if (c.method != Method::Euclidean && std::find(ranks.begin(), ranks.end(), c.rank) == ranks.end())
            ranks.push_back(c.rank);
    for (int r : ranks) {
        for (const auto& c : table.cells) {
            if (c.method == Method::Euclidean || c.rank != r) continue;
            out << r << ',' << method_name(c.method) << ',';
            write_summary_pair(out, c.average_accuracy, c.average_macro_f1);
            out << '\n';
        }
        if (eu) {
            // The baseline does not depend on r; repeated as a flat reference line.
            out << r << ",EU,";
            write_summary_pair(out, eu->average_accuracy, eu->average_macro_f1);
            out << '\n';
        }
    }
}

}  // namespace hmtml
