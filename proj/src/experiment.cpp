#include "nscr/experiment.hpp"

#include "nscr/parallel.hpp"
#include "nscr/random.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>

namespace nscr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + (dir / name).string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& dir, const std::string& name) {
    out.close();
    if (!out) throw InputError("failed writing " + (dir / name).string());
}

LabeledDataset load_required(const std::filesystem::path& path, const char* key) {
    if (path.empty()) throw InputError(std::string("config key '") + key + "' is required");
    return load_dataset(path);
}

std::uint64_t trial_seed(const ExperimentSpec& spec, int trial) {
    return derive_seed(spec.seed, static_cast<std::uint64_t>(trial));
}

} // namespace

ExperimentSpec ExperimentSpec::from_config(const Config& config) {
    ExperimentSpec spec;
    spec.dataset = config.get_string("dataset", "");
    if (config.has("test_dataset")) spec.test_dataset = config.get_string("test_dataset", "");
    spec.coder = config.get_string("coder", spec.coder);
    spec.preset = config.get_string("preset", "");
    if (!spec.preset.empty()) {
        const auto [alpha, beta] = nscr::preset(spec.preset);
        spec.solver.alpha = alpha;
        spec.solver.beta = beta;
    }
    spec.solver.alpha = config.get_double("alpha", spec.solver.alpha);
    spec.solver.beta = config.get_double("beta", spec.solver.beta);
    spec.solver.rho = config.get_double("rho", spec.solver.rho);
    spec.solver.tol = config.get_double("tol", spec.solver.tol);
    spec.solver.max_iter = static_cast<int>(config.get_int("max_iter", spec.solver.max_iter));
    spec.solver.validate();
    spec.lambda = config.get_double("lambda", spec.lambda);
    require(spec.lambda > 0.0, "lambda must be > 0");
    spec.cross_validate = config.get_bool("cv", false);
    spec.grid.folds = static_cast<int>(config.get_int("cv_folds", spec.grid.folds));
    spec.grid.alphas = config.get_doubles("alphas", spec.grid.alphas);
    spec.grid.betas = config.get_doubles("betas", spec.grid.betas);
    spec.grid.validate();
    spec.pca_dim = config.get_int("pca_dim", 0);
    require(spec.pca_dim >= 0, "pca_dim must be >= 0");
    spec.n_per_class = config.get_int("n_per_class", 0);
    require(spec.n_per_class >= 0, "n_per_class must be >= 0");
    spec.train_fraction = config.get_double("train_fraction", spec.train_fraction);
    spec.trials = static_cast<int>(config.get_int("trials", spec.trials));
    require(spec.trials >= 1, "trials must be >= 1");
    const long seed = config.get_int("seed", 1);
    spec.seed = static_cast<std::uint64_t>(seed);
    spec.output = config.get_string("output", spec.output.string());
    spec.query_index = config.get_int("query_index", 0);
    spec.coders = config.get_strings("coders", spec.coders);
    spec.timed_queries = static_cast<int>(config.get_int("queries", spec.timed_queries));
    require(spec.timed_queries >= 1, "queries must be >= 1");
    spec.include_precompute = config.get_bool("include_precompute", false);
    (void)spec.make_coder(spec.coder, spec.solver.alpha, spec.solver.beta);
    for (const auto& name : spec.coders) (void)spec.make_coder(name, spec.solver.alpha, spec.solver.beta);
    return spec;
}

CoderKind<double> ExperimentSpec::make_coder(const std::string& name, double alpha, double beta) const {
    SolverConfigd cfg = solver;
    cfg.alpha = alpha;
    cfg.beta = beta;
    if (name == "nscr") return NscrCoder<double>{cfg};
    if (name == "nrc") return NrcCoder<double>{solver};
    if (name == "crc") return CrcCoder<double>{lambda};
    if (name == "src") return SrcCoder<double>{lambda, solver};
    throw InputError("unknown coder '" + name + "' (expected nscr, crc, nrc or src)");
}

EvalSplit prepare_trial(const ExperimentSpec& spec, const LabeledDataset& pool, const LabeledDataset* test,
                        int trial) {
    const auto seed = trial_seed(spec, trial);
    EvalSplit split;
    if (test != nullptr) {
        split.train = spec.n_per_class > 0 ? subsample_per_class(pool.samples, spec.n_per_class, seed).train
                                           : pool.samples;
        split.holdout = test->samples;
        require(test->samples.dim() == pool.samples.dim(), "test dataset feature dimension differs from dataset");
    } else {
        auto parts = spec.n_per_class > 0 ? subsample_per_class(pool.samples, spec.n_per_class, seed)
                                          : split_fraction_per_class(pool.samples, spec.train_fraction, seed);
        split.train = std::move(parts.train);
        split.holdout = std::move(parts.holdout);
    }
    if (spec.pca_dim > 0) {
        const auto model = fit_pca(split.train, spec.pca_dim);
        split.train = apply_pca(model, split.train);
        split.holdout = apply_pca(model, split.holdout);
    }
    return split;
}

BenchmarkReport cmd_benchmark(const ExperimentSpec& spec, std::ostream& log) {
    const auto pool = load_required(spec.dataset, "dataset");
    std::optional<LabeledDataset> test;
    if (spec.test_dataset) test = load_dataset(*spec.test_dataset);

    BenchmarkReport report;
    std::vector<std::string> prediction_rows;
    std::vector<std::string> class_ids;
    for (int t = 0; t < spec.trials; ++t) {
        try {
            const auto split = prepare_trial(spec, pool, test ? &*test : nullptr, t);
            if (split.holdout.empty()) throw InputError("holdout set is empty");

            TrialRecord rec;
            rec.trial = t;
            rec.seed = trial_seed(spec, t);
            rec.n_train = split.train.size();
            rec.n_test = split.holdout.size();
            rec.alpha = spec.solver.alpha;
            rec.beta = spec.solver.beta;
            if (spec.cross_validate && spec.coder == "nscr") {
                const auto cv = grid_search(split.train, spec.grid, spec.solver, derive_seed(rec.seed, 0xC5));
                rec.alpha = cv.best_alpha();
                rec.beta = cv.best_beta();
            }

            const auto model = fit_model(split.train, spec.make_coder(spec.coder, rec.alpha, rec.beta));
            if (class_ids.empty()) class_ids = model.partition().class_ids();
            require(model.partition().class_ids() == class_ids, "training classes differ between trials");

            std::vector<ClassificationResult<double>> results(static_cast<std::size_t>(split.holdout.size()));
            const auto start = Clock::now();
            parallel_for(results.size(), [&](std::size_t j) {
                results[j] = model.classify(split.holdout.values().col(static_cast<Index>(j)));
            });
            const double elapsed = seconds_since(start);
            rec.seconds_per_query = elapsed / static_cast<double>(results.size());

            for (std::size_t j = 0; j < results.size(); ++j) {
                const auto& truth = split.holdout.label(static_cast<Index>(j));
                if (results[j].label == truth) ++rec.correct;
                std::string row = std::to_string(t) + ',' + std::to_string(j) + ',' + results[j].label + ',' + truth;
                for (Index k = 0; k < results[j].residuals.size(); ++k)
                    row += ',' + format_double(results[j].residuals(k));
                prediction_rows.push_back(std::move(row));
            }
            rec.accuracy = 100.0 * static_cast<double>(rec.correct) / static_cast<double>(rec.n_test);
            log << "trial " << t << ": accuracy " << fixed(rec.accuracy, 1) << "% (alpha=" << rec.alpha
                << ", beta=" << rec.beta << ")\n";
            report.trials.push_back(rec);
        } catch (const Error& e) {
            throw Error("trial " + std::to_string(t) + ": " + e.what());
        }
    }

    const double n = static_cast<double>(report.trials.size());
    double sum = 0.0;
    double time_sum = 0.0;
    double lo = 100.0;
    double hi = 0.0;
    for (const auto& r : report.trials) {
        sum += r.accuracy;
        time_sum += r.seconds_per_query;
        lo = std::min(lo, r.accuracy);
        hi = std::max(hi, r.accuracy);
    }
    report.mean_accuracy = sum / n;
    report.mean_seconds_per_query = time_sum / n;
    double sq = 0.0;
    for (const auto& r : report.trials) sq += (r.accuracy - report.mean_accuracy) * (r.accuracy - report.mean_accuracy);
    report.std_accuracy = report.trials.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;

    const auto& dir = spec.output;
    {
        auto out = open_output(dir, "trials.csv");
        out << "trial,seed,n_train,n_test,alpha,beta,correct,accuracy\n";
        for (const auto& r : report.trials)
            out << r.trial << ',' << r.seed << ',' << r.n_train << ',' << r.n_test << ',' << format_double(r.alpha)
                << ',' << format_double(r.beta) << ',' << r.correct << ',' << format_double(r.accuracy) << '\n';
        finish(out, dir, "trials.csv");
    }
    {
        auto out = open_output(dir, "summary.csv");
        out << "coder,trials,seed,pca_dim,n_per_class,mean_accuracy,std_accuracy,min_accuracy,max_accuracy\n";
        out << spec.coder << ',' << report.trials.size() << ',' << spec.seed << ',' << spec.pca_dim << ','
            << spec.n_per_class << ',' << format_double(report.mean_accuracy) << ','
            << format_double(report.std_accuracy) << ',' << format_double(lo) << ',' << format_double(hi) << '\n';
        finish(out, dir, "summary.csv");
    }
    {
        auto out = open_output(dir, "predictions.csv");
        out << "trial,query_index,predicted_label,true_label";
        for (std::size_t k = 0; k < class_ids.size(); ++k) out << ",r_" << (k + 1);
        out << '\n';
        for (const auto& row : prediction_rows) out << row << '\n';
        finish(out, dir, "predictions.csv");
    }
    {
        auto out = open_output(dir, "benchmark_timing.csv");
        out << "trial,n_test,seconds_per_query\n";
        for (const auto& r : report.trials)
            out << r.trial << ',' << r.n_test << ',' << format_double(r.seconds_per_query) << '\n';
        finish(out, dir, "benchmark_timing.csv");
    }
    log << spec.coder << ": " << fixed(report.mean_accuracy, 1) << " +/- " << fixed(report.std_accuracy, 1)
        << "% over " << report.trials.size() << " trial(s); " << report.mean_seconds_per_query
        << " s per query\n";
    return report;
}

CvReport cmd_sweep(const ExperimentSpec& spec, std::ostream& log) {
    const auto pool = load_required(spec.dataset, "dataset");
    std::optional<LabeledDataset> test;
    if (spec.test_dataset) test = load_dataset(*spec.test_dataset);
    std::vector<EvalSplit> splits;
    for (int t = 0; t < spec.trials; ++t) {
        splits.push_back(prepare_trial(spec, pool, test ? &*test : nullptr, t));
        if (splits.back().holdout.empty()) throw InputError("trial " + std::to_string(t) + ": holdout set is empty");
    }
    auto report = evaluate_grid(splits, spec.grid.alphas, spec.grid.betas, spec.solver);
    auto out = open_output(spec.output, "sweep.csv");
    write_grid_csv(out, report, 100.0);
    finish(out, spec.output, "sweep.csv");
    log << "best alpha=" << report.best_alpha() << " beta=" << report.best_beta() << " accuracy "
        << fixed(100.0 * report.accuracy(report.best_alpha_index, report.best_beta_index), 1) << "%\n";
    return report;
}

ResidualHistory<double> cmd_convergence(const ExperimentSpec& spec, std::ostream& log) {
    const auto pool = load_required(spec.dataset, "dataset");
    SampleMatrixd dictionary;
    Vector<double> query;
    if (spec.test_dataset) {
        const auto test = load_dataset(*spec.test_dataset);
        if (spec.query_index < 0 || spec.query_index >= test.samples.size())
            throw InputError("query_index " + std::to_string(spec.query_index) + " out of range [0, " +
                             std::to_string(test.samples.size()) + ")");
        dictionary = pool.samples;
        query = test.samples.values().col(spec.query_index);
    } else {
        const Index n = pool.samples.size();
        if (spec.query_index < 0 || spec.query_index >= n)
            throw InputError("query_index " + std::to_string(spec.query_index) + " out of range [0, " +
                             std::to_string(n) + ")");
        require(n >= 2, "leave-one-out convergence needs at least two samples");
        std::vector<Index> rest;
        for (Index j = 0; j < n; ++j)
            if (j != spec.query_index) rest.push_back(j);
        dictionary = select_columns(pool.samples, rest);
        query = pool.samples.values().col(spec.query_index);
    }
    if (spec.pca_dim > 0) {
        const auto model = fit_pca(dictionary, spec.pca_dim);
        dictionary = apply_pca(model, dictionary);
        query = apply_pca(model, query);
    }
    const Matrix<double> X = normalize_columns(dictionary.values());
    const Vector<double> y = normalize_query(query);
    const auto result = solve(X, y, spec.solver);

    auto out = open_output(spec.output, "convergence.csv");
    write_history_csv(out, result.history);
    finish(out, spec.output, "convergence.csv");
    log << "iterations " << result.iterations << (result.converged ? " (converged)" : " (iteration cap)")
        << "; final ||z-c|| = " << result.history.zc_gap.back() << '\n';
    return result.history;
}

std::vector<TimingRow> cmd_time(const ExperimentSpec& spec, std::ostream& log) {
    const auto pool = load_required(spec.dataset, "dataset");
    std::optional<LabeledDataset> test;
    if (spec.test_dataset) test = load_dataset(*spec.test_dataset);
    const auto split = prepare_trial(spec, pool, test ? &*test : nullptr, 0);
    require(!split.holdout.empty(), "timing needs a non-empty holdout set");

    std::vector<TimingRow> rows;
    for (const auto& name : spec.coders) {
        const auto fit_start = Clock::now();
        const auto model = fit_model(split.train, spec.make_coder(name, spec.solver.alpha, spec.solver.beta));
        const double fit_seconds = seconds_since(fit_start);
        (void)model.classify(split.holdout.values().col(0));  // warm-up

        Index correct = 0;
        const auto start = Clock::now();
        for (int q = 0; q < spec.timed_queries; ++q) {
            const Index col = q % split.holdout.size();
            if (model.classify(split.holdout.values().col(col)).label == split.holdout.label(col)) ++correct;
        }
        double per_query = seconds_since(start) / spec.timed_queries;
        if (spec.include_precompute) per_query += fit_seconds / spec.timed_queries;
        rows.push_back({name, spec.timed_queries, per_query, 100.0 * static_cast<double>(correct) / spec.timed_queries});
        log << name << ": " << per_query << " s per query\n";
    }
    auto out = open_output(spec.output, "timing.csv");
    out << "coder,queries,seconds_per_query,accuracy\n";
    for (const auto& r : rows)
        out << r.coder << ',' << r.queries << ',' << format_double(r.seconds_per_query) << ','
            << format_double(r.accuracy) << '\n';
    finish(out, spec.output, "timing.csv");
    return rows;
}

CvReport cmd_cv(const ExperimentSpec& spec, std::ostream& log) {
    const auto pool = load_required(spec.dataset, "dataset");
    SampleMatrixd train = spec.n_per_class > 0
                              ? subsample_per_class(pool.samples, spec.n_per_class, trial_seed(spec, 0)).train
                              : pool.samples;
    if (spec.pca_dim > 0) train = apply_pca(fit_pca(train, spec.pca_dim), train);
    auto report = grid_search(train, spec.grid, spec.solver, spec.seed);
    {
        auto out = open_output(spec.output, "cv.csv");
        write_grid_csv(out, report, 100.0);
        finish(out, spec.output, "cv.csv");
    }
    {
        auto out = open_output(spec.output, "cv_best.csv");
        out << "alpha,beta,mean_accuracy\n"
            << format_double(report.best_alpha()) << ',' << format_double(report.best_beta()) << ','
            << format_double(100.0 * report.accuracy(report.best_alpha_index, report.best_beta_index)) << '\n';
        finish(out, spec.output, "cv_best.csv");
    }
    log << spec.grid.folds << "-fold CV best: alpha=" << report.best_alpha() << " beta=" << report.best_beta()
        << " accuracy " << fixed(100.0 * report.accuracy(report.best_alpha_index, report.best_beta_index), 1)
        << "%\n";
    return report;
}

void write_history_csv(std::ostream& out, const ResidualHistory<double>& history) {
    out << "iter,zc_gap,dc,dz\n";
    for (std::size_t t = 0; t < history.size(); ++t)
        out << (t + 1) << ',' << format_double(history.zc_gap[t]) << ',' << format_double(history.dc[t]) << ','
            << format_double(history.dz[t]) << '\n';
}

} // namespace nscr
