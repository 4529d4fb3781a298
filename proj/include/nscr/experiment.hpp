#pragma once

#include "nscr/classifier.hpp"
#include "nscr/io.hpp"
#include "nscr/model_selection.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nscr {

/// `key = value` settings. Later sources override earlier ones.
class Config {
public:
    static Config parse(std::istream& in, const std::string& source = "<config>");
    static Config from_file(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    void merge(const Config& overrides);
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Every key the harness understands; anything else is rejected.
const std::vector<std::string>& known_config_keys();

struct ExperimentSpec {
    std::filesystem::path dataset;
    std::optional<std::filesystem::path> test_dataset;
    std::string coder = "nscr";
    std::string preset;
    SolverConfigd solver;
    double lambda = 0.001;
    bool cross_validate = false;
    CvGrid grid;
    Index pca_dim = 0;
    Index n_per_class = 0;
    double train_fraction = 0.5;
    int trials = 10;
    std::uint64_t seed = 1;
    std::filesystem::path output = "nscr_out";
    Index query_index = 0;
    std::vector<std::string> coders{"nscr", "crc", "nrc", "src"};
    int timed_queries = 50;
    bool include_precompute = false;

    static ExperimentSpec from_config(const Config& config);
    CoderKind<double> make_coder(const std::string& name, double alpha, double beta) const;
};

/// Train/holdout pair for one trial, after the optional PCA projection.
EvalSplit prepare_trial(const ExperimentSpec& spec, const LabeledDataset& pool, const LabeledDataset* test, int trial);

struct TrialRecord {
    int trial = 0;
    std::uint64_t seed = 0;
    Index n_train = 0;
    Index n_test = 0;
    double alpha = 0.0;
    double beta = 0.0;
    Index correct = 0;
    double accuracy = 0.0;  // percent
    double seconds_per_query = 0.0;
};

struct BenchmarkReport {
    std::vector<TrialRecord> trials;
    double mean_accuracy = 0.0;  // percent
    double std_accuracy = 0.0;   // sample standard deviation, percent
    double mean_seconds_per_query = 0.0;
};

struct TimingRow {
    std::string coder;
    int queries = 0;
    double seconds_per_query = 0.0;
    double accuracy = 0.0;  // percent over the timed queries
};

/// Repeated trials: split, project, (cross-validate), fit, classify holdout.
/// Writes trials.csv, summary.csv, predictions.csv and benchmark_timing.csv.
BenchmarkReport cmd_benchmark(const ExperimentSpec& spec, std::ostream& log);

/// Held-out NSCR accuracy over the (alpha, beta) grid across trials; writes sweep.csv.
CvReport cmd_sweep(const ExperimentSpec& spec, std::ostream& log);

/// Residual curves for one query; writes convergence.csv.
ResidualHistory<double> cmd_convergence(const ExperimentSpec& spec, std::ostream& log);

/// Per-query seconds for each coder; writes timing.csv.
std::vector<TimingRow> cmd_time(const ExperimentSpec& spec, std::ostream& log);

/// Stratified k-fold grid search on the dataset; writes cv.csv and cv_best.csv.
CvReport cmd_cv(const ExperimentSpec& spec, std::ostream& log);

void write_history_csv(std::ostream& out, const ResidualHistory<double>& history);

} // namespace nscr
