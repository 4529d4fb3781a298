#pragma once

#include "nscr/classifier.hpp"
#include "nscr/data.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nscr {

struct FoldSplit {
    std::vector<Index> fit;       // ascending column indices
    std::vector<Index> validate;  // ascending column indices
};

/// Per-class shuffled round-robin assignment: in every fold each class's
/// count differs by at most one from its other folds.
std::vector<FoldSplit> stratified_kfold(const ClassPartition& partition, int folds, std::uint64_t seed);

struct CvGrid {
    std::vector<double> alphas{0.001, 0.01, 0.05, 0.1, 0.5};
    std::vector<double> betas{0.001, 0.01, 0.05, 0.1, 0.5};
    int folds = 5;

    void validate() const;
};

/// Pre-split (train, holdout) pair for grid evaluation.
struct EvalSplit {
    SampleMatrixd train;
    SampleMatrixd holdout;
};

struct CvReport {
    std::vector<double> alphas;
    std::vector<double> betas;
    Matrix<double> accuracy;             // |alphas| x |betas|, mean over splits, in [0, 1]
    std::vector<Matrix<double>> per_fold;
    Index best_alpha_index = 0;
    Index best_beta_index = 0;

    double best_alpha() const { return alphas[static_cast<std::size_t>(best_alpha_index)]; }
    double best_beta() const { return betas[static_cast<std::size_t>(best_beta_index)]; }
};

/// Fraction of holdout columns whose predicted label matches.
double holdout_accuracy(const ClassifierModel<double>& model, const SampleMatrixd& holdout);

/// NSCR accuracy for every (alpha, beta) over the given splits. One
/// factorization per (split, alpha) is shared by all betas. Best cell: highest
/// mean accuracy, ties to smaller alpha then smaller beta.
CvReport evaluate_grid(std::span<const EvalSplit> splits, std::span<const double> alphas,
                       std::span<const double> betas, const SolverConfigd& base);

/// Stratified k-fold grid search over (alpha, beta) on a training set.
CvReport grid_search(const SampleMatrixd& train, const CvGrid& grid, const SolverConfigd& base, std::uint64_t seed);

/// Builds the (fit, validate) sample matrices of each fold.
std::vector<EvalSplit> materialize_folds(const SampleMatrixd& train, std::span<const FoldSplit> folds);

/// `alpha, beta, mean_accuracy` rows, alpha-major; accuracy multiplied by `scale`.
void write_grid_csv(std::ostream& out, const CvReport& report, double scale = 1.0);

struct Preset {
    std::string_view name;
    double alpha;
    double beta;
};

/// Tuned (alpha, beta) per benchmark dataset.
std::span<const Preset> presets();
std::pair<double, double> preset(std::string_view dataset_name);

} // namespace nscr
