#include "nscr/model_selection.hpp"

#include "nscr/io.hpp"
#include "nscr/parallel.hpp"
#include "nscr/random.hpp"

#include <algorithm>
#include <array>
#include <memory>
#include <numeric>
#include <ostream>

namespace nscr {

std::vector<FoldSplit> stratified_kfold(const ClassPartition& partition, int folds, std::uint64_t seed) {
    require(folds >= 2, "need at least 2 folds");
    require(partition.num_classes() >= 1, "cannot fold an empty partition");
    if (folds > partition.min_class_size())
        throw InputError("fold count " + std::to_string(folds) + " exceeds smallest class size " +
                         std::to_string(partition.min_class_size()));

    const auto F = static_cast<std::size_t>(folds);
    std::vector<std::vector<Index>> members(F);
    std::size_t offset = 0;
    for (Index k = 0; k < partition.num_classes(); ++k) {
        std::vector<Index> local(static_cast<std::size_t>(partition.size(k)));
        std::iota(local.begin(), local.end(), partition.begin(k));
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        rng.shuffle(local);
        for (std::size_t i = 0; i < local.size(); ++i) members[(offset + i) % F].push_back(local[i]);
        offset = (offset + local.size()) % F;
    }

    std::vector<FoldSplit> out(F);
    for (std::size_t f = 0; f < F; ++f) {
        out[f].validate = members[f];
        std::sort(out[f].validate.begin(), out[f].validate.end());
        for (std::size_t g = 0; g < F; ++g)
            if (g != f) out[f].fit.insert(out[f].fit.end(), members[g].begin(), members[g].end());
        std::sort(out[f].fit.begin(), out[f].fit.end());
    }
    return out;
}

void CvGrid::validate() const {
    require(!alphas.empty() && !betas.empty(), "CV grid axes must be non-empty");
    for (const auto* axis : {&alphas, &betas}) {
        require(std::is_sorted(axis->begin(), axis->end()), "CV grid axes must be sorted ascending");
        require(std::adjacent_find(axis->begin(), axis->end()) == axis->end(), "CV grid axes must not repeat");
        require(axis->front() >= 0.0, "CV grid values must be >= 0");
    }
    require(folds >= 2, "CV needs at least 2 folds");
}

double holdout_accuracy(const ClassifierModel<double>& model, const SampleMatrixd& holdout) {
    if (holdout.empty()) return 0.0;
    std::vector<char> hit(static_cast<std::size_t>(holdout.size()), 0);
    parallel_for(hit.size(), [&](std::size_t j) {
        const auto col = static_cast<Index>(j);
        hit[j] = model.classify(holdout.values().col(col)).label == holdout.label(col);
    });
    const auto correct = std::count(hit.begin(), hit.end(), 1);
    return static_cast<double>(correct) / static_cast<double>(holdout.size());
}

CvReport evaluate_grid(std::span<const EvalSplit> splits, std::span<const double> alphas,
                       std::span<const double> betas, const SolverConfigd& base) {
    require(!splits.empty(), "grid evaluation needs at least one split");
    require(!alphas.empty() && !betas.empty(), "grid axes must be non-empty");

    CvReport report;
    report.alphas.assign(alphas.begin(), alphas.end());
    report.betas.assign(betas.begin(), betas.end());
    const auto A = static_cast<Index>(alphas.size());
    const auto B = static_cast<Index>(betas.size());
    report.accuracy = Matrix<double>::Zero(A, B);

    for (const auto& split : splits) {
        auto X = std::make_shared<const Matrix<double>>(normalize_columns(split.train.values()));
        const GramCache<double> cache(X);
        Matrix<double> fold_acc(A, B);
        for (Index a = 0; a < A; ++a) {
            for (Index b = 0; b < B; ++b) {
                SolverConfigd cfg = base;
                cfg.alpha = alphas[static_cast<std::size_t>(a)];
                cfg.beta = betas[static_cast<std::size_t>(b)];
                const auto model =
                    ClassifierModel<double>::from_cache(X, split.train.partition(), NscrCoder<double>{cfg}, cache);
                fold_acc(a, b) = holdout_accuracy(model, split.holdout);
            }
        }
        report.accuracy += fold_acc;
        report.per_fold.push_back(std::move(fold_acc));
    }
    report.accuracy /= static_cast<double>(splits.size());

    double best = -1.0;
    for (Index a = 0; a < A; ++a) {
        for (Index b = 0; b < B; ++b) {
            if (report.accuracy(a, b) > best) {
                best = report.accuracy(a, b);
                report.best_alpha_index = a;
                report.best_beta_index = b;
            }
        }
    }
    return report;
}

std::vector<EvalSplit> materialize_folds(const SampleMatrixd& train, std::span<const FoldSplit> folds) {
    std::vector<EvalSplit> out;
    out.reserve(folds.size());
    for (const auto& fold : folds)
        out.push_back({select_columns(train, fold.fit), select_columns(train, fold.validate)});
    return out;
}

CvReport grid_search(const SampleMatrixd& train, const CvGrid& grid, const SolverConfigd& base, std::uint64_t seed) {
    grid.validate();
    base.validate();
    const auto folds = stratified_kfold(train.partition(), grid.folds, seed);
    const auto splits = materialize_folds(train, folds);
    return evaluate_grid(splits, grid.alphas, grid.betas, base);
}

void write_grid_csv(std::ostream& out, const CvReport& report, double scale) {
    out << "alpha,beta,mean_accuracy\n";
    for (std::size_t a = 0; a < report.alphas.size(); ++a)
        for (std::size_t b = 0; b < report.betas.size(); ++b)
            out << format_double(report.alphas[a]) << ',' << format_double(report.betas[b]) << ','
                << format_double(scale * report.accuracy(static_cast<Index>(a), static_cast<Index>(b))) << '\n';
}

namespace {

constexpr std::array kPresets{
    Preset{"ar", 0.01, 0.01},
    Preset{"extended_yale_b", 0.05, 0.01},
    Preset{"usps", 0.01, 0.05},
    Preset{"mnist", 0.05, 0.05},
    Preset{"stanford40", 0.05, 0.1},
    Preset{"caltech256", 0.01, 0.05},
    Preset{"cub200", 0.1, 0.01},
    Preset{"flowers102", 0.01, 0.1},
    Preset{"aircraft", 0.05, 0.05},
    Preset{"cars", 0.05, 0.01},
};

} // namespace

std::span<const Preset> presets() { return kPresets; }

std::pair<double, double> preset(std::string_view dataset_name) {
    for (const auto& p : kPresets)
        if (p.name == dataset_name) return {p.alpha, p.beta};
    std::string known;
    for (const auto& p : kPresets) {
        if (!known.empty()) known += ", ";
        known += p.name;
    }
    throw InputError("unknown preset '" + std::string(dataset_name) + "'; available: " + known);
}

} // namespace nscr
