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

// Command-line front end: synthetic data, single fits, scoring, and the
// full experiment/ablation protocol.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hmtml/dataset.hpp"
#include "hmtml/error.hpp"
#include "hmtml/evaluation.hpp"
#include "hmtml/experiment.hpp"
#include "hmtml/metric_model.hpp"
#include "hmtml/model_io.hpp"

namespace fs = std::filesystem;
using namespace hmtml;

namespace {

void add_synth_flags(CLI::App* app, SynthSpec& s, bool with_seed) {
    app->add_option("--latent-dim", s.latent_dim, "Latent dimension")->capture_default_str();
    app->add_option("--dims", s.dims, "Feature dimension of each domain")->capture_default_str();
    app->add_option("--classes", s.num_classes, "Number of classes")->capture_default_str();
    app->add_option("--per-class", s.per_class, "Samples per class and domain")->capture_default_str();
    app->add_option("--noise", s.noise, "Isotropic noise level")->capture_default_str();
    app->add_option("--separation", s.class_separation, "Scale of the class means")->capture_default_str();
    app->add_option("--nuisance-dims", s.nuisance_dims, "Rank of the per-domain nuisance term")
        ->capture_default_str();
    app->add_option("--nuisance-scale", s.nuisance_scale, "Scale of the nuisance term")->capture_default_str();
    app->add_flag("--identity-maps", s.identity_maps, "Use identity latent maps");
    if (with_seed) app->add_option("--data-seed", s.seed, "Generator seed")->capture_default_str();
}

void add_solver_flags(CLI::App* app, HmtmlConfig& c) {
    app->add_option("--rho", c.rho, "Loss sharpness")->capture_default_str();
    app->add_option("--sigma", c.sigma, "l1 smoothing width")->capture_default_str();
    app->add_option("--kappa", c.kappa, "Sufficient decrease constant")->capture_default_str();
    app->add_option("--beta", c.beta, "Step-size multiplier")->capture_default_str();
    app->add_option("--mu0", c.mu0, "Initial step size")->capture_default_str();
    app->add_option("--inner-tol", c.inner_tolerance, "Inner relative tolerance")->capture_default_str();
    app->add_option("--outer-tol", c.outer_tolerance, "Outer relative tolerance")->capture_default_str();
    app->add_option("--max-outer", c.max_outer, "Sweep cap")->capture_default_str();
    app->add_option("--max-inner", c.max_inner, "PGM step cap")->capture_default_str();
    app->add_option("--max-checks", c.max_step_checks, "Step-size checks per PGM step")->capture_default_str();
    app->add_option("--order", c.update_order, "Domain update order (0-based)");
}

void add_task_flags(CLI::App* app, ExperimentConfig& cfg) {
    app->add_option("--svm-lambda", cfg.svm.penalty, "SVM penalty C")->capture_default_str();
    app->add_option("--svm-epochs", cfg.svm.max_epochs, "SVM epoch cap")->capture_default_str();
    app->add_option("--max-pairs", cfg.pairs.max_pairs, "Pair cap per domain (0 = all)")->capture_default_str();
}

std::vector<double> parse_grid(const std::vector<std::string>& items) {
    std::vector<double> out;
    for (const auto& s : items) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size()) throw InvalidInput("bad grid value '" + s + "'");
        out.push_back(v);
    }
    return out;
}

void log_fits(const FitLog& log) {
    std::fprintf(stderr,
                 "fits %d, max sweeps %d, max PGM steps %d, max step checks %d, "
                 "nonmonotone %d, negative %d, iteration warnings %d\n",
                 log.fits, log.max_outer, log.max_inner, log.max_checks, log.nonmonotone, log.negative,
                 log.warnings);
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + path.string());
    out << text;
    if (!out) throw InvalidInput("write failed: " + path.string());
}

struct ExperimentArgs {
    ExperimentConfig cfg;
    SynthSpec synth;
    std::vector<std::string> methods;
    std::vector<std::string> gamma_grid;
    std::vector<std::string> gamma_m_grid;
    std::size_t kpca_components = 0;
    double kpca_energy = 0.0;
    bool no_center = false;
    std::string out_dir = ".";
};

void add_experiment_flags(CLI::App* app, ExperimentArgs& a) {
    app->add_option("--data", a.cfg.paths, "Per-domain CSV files (otherwise synthetic data)");
    add_synth_flags(app, a.synth, true);
    app->add_option("--seed", a.cfg.seed, "Protocol seed")->required();
    app->add_option("--labels-per-class", a.cfg.labels_per_class, "Labeled samples per class")
        ->capture_default_str();
    app->add_option("--ranks", a.cfg.ranks, "Rank grid")->capture_default_str();
    app->add_option("--gamma-grid", a.gamma_grid, "Coupling weights to search (default 1e-5..1e4)");
    app->add_option("--gamma-m-grid", a.gamma_m_grid, "Sparsity weights to search (default 1e-5..1e4)");
    app->add_option("--repetitions", a.cfg.repetitions, "Random labeled splits")->capture_default_str();
    app->add_option("--neighbors", a.cfg.neighbors, "k of the k-NN classifier")->capture_default_str();
    app->add_option("--kpca-components", a.kpca_components, "Kernel PCA output dimension");
    app->add_option("--kpca-energy", a.kpca_energy, "Kernel PCA retained energy in (0, 1]");
    app->add_flag("--no-center", a.no_center, "Keep raw feature offsets");
    app->add_flag("--normalize", a.cfg.normalize, "Scale samples to unit norm");
    add_solver_flags(app, a.cfg.solver);
    add_task_flags(app, a.cfg);
    app->add_option("--out", a.out_dir, "Output directory for results.csv and curve.csv")->capture_default_str();
}

int run_experiment_command(ExperimentArgs& a) {
    ExperimentConfig& cfg = a.cfg;
    if (cfg.paths.empty()) cfg.synth = a.synth;
    if (!a.methods.empty()) {
        cfg.methods.clear();
        for (const auto& m : a.methods) cfg.methods.push_back(parse_method(m));
    }
    if (!a.gamma_grid.empty()) cfg.gamma_grid = parse_grid(a.gamma_grid);
    if (!a.gamma_m_grid.empty()) cfg.gamma_m_grid = parse_grid(a.gamma_m_grid);
    if (a.kpca_components > 0 || a.kpca_energy > 0.0) {
        KpcaOptions k;
        k.components = a.kpca_components;
        if (a.kpca_energy > 0.0) k.energy = a.kpca_energy;
        cfg.kpca = k;
    }
    cfg.center = !a.no_center;

    const ResultTable table = run_experiment(cfg);
    std::ostringstream results, curve;
    write_results_csv(results, table);
    write_curve_csv(curve, table);
    fs::create_directories(a.out_dir);
    write_file(fs::path(a.out_dir) / "results.csv", results.str());
    write_file(fs::path(a.out_dir) / "curve.csv", curve.str());
    log_fits(table.fit_log);
    for (const auto& cell : table.cells)
        for (const auto& msg : cell.failure_messages)
            std::fprintf(stderr, "%s r=%d failed: %s\n", method_name(cell.method).c_str(), cell.rank, msg.c_str());
    std::cout << results.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heterogeneous multi-task metric learning"};
    app.require_subcommand(1);

    // synth
    SynthSpec synth;
    std::string synth_out = ".";
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic multi-domain data set as CSV files");
    add_synth_flags(synth_cmd, synth, false);
    synth_cmd->add_option("--seed", synth.seed, "Generator seed")->required();
    synth_cmd->add_option("--out", synth_out, "Output directory")->capture_default_str();

    // train
    ExperimentConfig train_cfg;
    std::vector<std::string> train_data;
    std::string model_path, weights_path;
    std::uint64_t train_seed = 0;
    auto* train_cmd = app.add_subcommand("train", "Fit metrics on labeled CSV files (used as given)");
    train_cmd->add_option("--data", train_data, "Per-domain labeled CSV files")->required();
    train_cmd->add_option("--model", model_path, "Output model file")->required();
    train_cmd->add_option("--task-weights", weights_path, "Also write the ECOC task weights");
    train_cmd->add_option("--seed", train_seed, "Seed for tasks, pairs and initialization")->capture_default_str();
    train_cmd->add_option("--rank", train_cfg.solver.rank, "Shared rank r")->capture_default_str();
    train_cmd->add_option("--gamma", train_cfg.solver.gamma, "Coupling weight")->capture_default_str();
    train_cmd->add_option("--gamma-m", train_cfg.solver.gamma_m, "Sparsity weight")->capture_default_str();
    std::string train_method = "HMTML";
    train_cmd->add_option("--method", train_method, "HMTML, loss0, reg0, fnorm or noconstr")->capture_default_str();
    add_solver_flags(train_cmd, train_cfg.solver);
    add_task_flags(train_cmd, train_cfg);

    // eval
    std::string eval_model;
    std::vector<std::string> eval_train, eval_test;
    int eval_k = 1;
    auto* eval_cmd = app.add_subcommand("eval", "Score k-NN with a trained model (or Euclidean without one)");
    eval_cmd->add_option("--model", eval_model, "Model file; omit for the Euclidean metric");
    eval_cmd->add_option("--train", eval_train, "Per-domain reference CSV files")->required();
    eval_cmd->add_option("--test", eval_test, "Per-domain query CSV files")->required();
    eval_cmd->add_option("-k,--neighbors", eval_k, "k of the k-NN classifier")->capture_default_str();

    // experiment / ablate
    ExperimentArgs exp_args;
    auto* exp_cmd = app.add_subcommand("experiment", "Run the labeled-split protocol and write result tables");
    add_experiment_flags(exp_cmd, exp_args);
    exp_cmd->add_option("--methods", exp_args.methods, "Learned methods besides EU (default HMTML)");

    ExperimentArgs abl_args;
    abl_args.methods = {"HMTML", "reg0", "loss0", "fnorm", "noconstr"};
    auto* abl_cmd = app.add_subcommand("ablate", "experiment with every ablation variant");
    add_experiment_flags(abl_cmd, abl_args);
    abl_cmd->add_option("--methods", abl_args.methods, "Variants to run")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth_cmd) {
            const DomainSet set = synth_generate(synth);
            fs::create_directories(synth_out);
            for (std::size_t m = 0; m < set.domains.size(); ++m) {
                const auto path = fs::path(synth_out) / ("domain_" + std::to_string(m + 1) + ".csv");
                save_domain_csv(path.string(), set.domains[m], set.class_names);
                std::cout << path.string() << '\n';
            }
        } else if (*train_cmd) {
            const DomainSet set = load_domains(train_data);
            train_cfg.solver.ablation = method_flags(parse_method(train_method));
            train_cfg.solver.seed = train_seed;
            train_cfg.solver.validate();
            const PreparedRun run = prepare_run(set.domains, set.domains, train_cfg, train_seed);
            const SolverState state = fit(run.problem, train_cfg.solver);
            FitLog log;
            log.record(state, train_cfg.solver);
            log_fits(log);
            for (const auto& w : state.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
            save_model(model_path, state.factors);
            if (!weights_path.empty()) save_task_weights(weights_path, run.tasks.per_domain);
        } else if (*eval_cmd) {
            require(eval_train.size() == eval_test.size(), "eval: need one --test file per --train file");
            std::vector<std::string> all = eval_train;
            all.insert(all.end(), eval_test.begin(), eval_test.end());
            // One load call so both sides share the label mapping.
            const DomainSet set = load_domains(all);
            const std::size_t m_count = eval_train.size();
            std::vector<FactorMatrix> factors;
            if (!eval_model.empty()) {
                factors = load_model(eval_model);
                require(factors.size() == m_count, "eval: model has a different number of domains");
            }
            std::vector<DomainData> train(set.domains.begin(), set.domains.begin() + static_cast<long>(m_count));
            std::vector<DomainData> test(set.domains.begin() + static_cast<long>(m_count), set.domains.end());
            const MethodScores scores = score_metrics(train, test, factors, eval_k);
            std::printf("domain,accuracy,macro_f1\n");
            for (std::size_t m = 0; m < m_count; ++m)
                std::printf("%zu,%.6f,%.6f\n", m + 1, scores.accuracy[m], scores.macro_f1[m]);
            std::printf("avg,%.6f,%.6f\n", scores.mean_accuracy(), scores.mean_macro_f1());
        } else if (*exp_cmd) {
            return run_experiment_command(exp_args);
        } else if (*abl_cmd) {
            return run_experiment_command(abl_args);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
