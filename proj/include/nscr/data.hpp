#pragma once

#include "nscr/core.hpp"
#include "nscr/random.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nscr {

/// Contiguous class blocks over the columns of a sample matrix.
/// Class k owns columns [boundaries[k], boundaries[k+1]).
class ClassPartition {
public:
    ClassPartition() : boundaries_{0} {}

    ClassPartition(std::vector<std::string> class_ids, std::vector<Index> boundaries)
        : class_ids_(std::move(class_ids)), boundaries_(std::move(boundaries)) {
        require(boundaries_.size() == class_ids_.size() + 1,
                "partition needs K+1 boundaries for K classes");
        require(boundaries_.front() == 0, "partition must start at column 0");
        for (std::size_t k = 0; k < class_ids_.size(); ++k) {
            require(boundaries_[k + 1] > boundaries_[k],
                    "class '" + class_ids_[k] + "' has no samples");
        }
        auto sorted = class_ids_;
        std::sort(sorted.begin(), sorted.end());
        require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
                "duplicate class id in partition");
    }

    static ClassPartition from_counts(std::vector<std::string> class_ids,
                                      std::span<const Index> counts) {
        require(class_ids.size() == counts.size(), "class id / count length mismatch");
        std::vector<Index> boundaries{0};
        for (Index n : counts) boundaries.push_back(boundaries.back() + n);
        return {std::move(class_ids), std::move(boundaries)};
    }

    Index num_classes() const { return static_cast<Index>(class_ids_.size()); }
    Index num_samples() const { return boundaries_.back(); }
    Index begin(Index k) const { return boundaries_[static_cast<std::size_t>(k)]; }
    Index end(Index k) const { return boundaries_[static_cast<std::size_t>(k) + 1]; }
    Index size(Index k) const { return end(k) - begin(k); }
    const std::string& class_id(Index k) const { return class_ids_[static_cast<std::size_t>(k)]; }
    const std::vector<std::string>& class_ids() const { return class_ids_; }
    const std::vector<Index>& boundaries() const { return boundaries_; }

    /// Class index owning `column`.
    Index class_of(Index column) const {
        require(column >= 0 && column < num_samples(), "column index out of range");
        auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), column);
        return static_cast<Index>(it - boundaries_.begin()) - 1;
    }

    /// Class index for `id`, or -1.
    Index find(const std::string& id) const {
        auto it = std::find(class_ids_.begin(), class_ids_.end(), id);
        return it == class_ids_.end() ? -1 : static_cast<Index>(it - class_ids_.begin());
    }

    Index min_class_size() const {
        Index smallest = num_samples();
        for (Index k = 0; k < num_classes(); ++k) smallest = std::min(smallest, size(k));
        return smallest;
    }

    bool operator==(const ClassPartition&) const = default;

private:
    std::vector<std::string> class_ids_;
    std::vector<Index> boundaries_;
};

/// D x N feature matrix, one sample per column, grouped by class.
///
/// An empty matrix (K = 0, N = 0) is allowed so that exhaustive splits can
/// return an empty holdout; every non-empty class has at least one column.
template <typename Scalar>
class SampleMatrix {
public:
    using MatrixType = Matrix<Scalar>;

    SampleMatrix() = default;

    SampleMatrix(MatrixType values, ClassPartition partition)
        : values_(std::move(values)), partition_(std::move(partition)) {
        require(values_.rows() >= 1, "sample matrix needs at least one feature row");
        require(values_.cols() == partition_.num_samples(),
                "partition covers " + std::to_string(partition_.num_samples()) +
                    " columns but matrix has " + std::to_string(values_.cols()));
        require(values_.allFinite(), "sample matrix contains non-finite entries");
    }

    const MatrixType& values() const { return values_; }
    const ClassPartition& partition() const { return partition_; }
    Index dim() const { return values_.rows(); }
    Index size() const { return values_.cols(); }
    Index num_classes() const { return partition_.num_classes(); }
    bool empty() const { return values_.cols() == 0; }

    auto block(Index k) const {
        return values_.middleCols(partition_.begin(k), partition_.size(k));
    }

    const std::string& label(Index column) const {
        return partition_.class_id(partition_.class_of(column));
    }

private:
    MatrixType values_;
    ClassPartition partition_;
};

using SampleMatrixd = SampleMatrix<double>;

inline constexpr double kZeroNormThreshold = 1e-12;

/// Unit l2 norm for a single vector; rejects (near-)zero input.
template <typename Derived>
Vector<typename Derived::Scalar> normalize_query(const Eigen::MatrixBase<Derived>& y) {
    using Scalar = typename Derived::Scalar;
    require(y.allFinite(), "query contains non-finite entries");
    const Scalar norm = y.norm();
    require(norm > Scalar(kZeroNormThreshold), "query has zero norm");
    return y / norm;
}

template <typename Scalar>
Matrix<Scalar> normalize_columns(const Matrix<Scalar>& values) {
    Matrix<Scalar> out = values;
    for (Index j = 0; j < out.cols(); ++j) {
        const Scalar norm = out.col(j).norm();
        if (!(norm > Scalar(kZeroNormThreshold)))
            throw InputError("column " + std::to_string(j) + " has zero norm");
        out.col(j) /= norm;
    }
    return out;
}

template <typename Scalar>
SampleMatrix<Scalar> normalize_columns(const SampleMatrix<Scalar>& samples) {
    return {normalize_columns(samples.values()), samples.partition()};
}

/// Principal subspace of a training set: out = projection * (x - mean).
template <typename Scalar>
struct PcaModel {
    Vector<Scalar> mean;
    Matrix<Scalar> projection;  // d x D, orthonormal rows

    Index input_dim() const { return projection.cols(); }
    Index output_dim() const { return projection.rows(); }
};

/// Top-`d` principal directions via thin SVD of the centered data. Each
/// direction's sign is fixed so its largest-magnitude entry is positive.
template <typename Scalar>
PcaModel<Scalar> fit_pca(const SampleMatrix<Scalar>& train, Index d) {
    const Index D = train.dim();
    const Index N = train.size();
    if (d < 1 || d > std::min(D, N))
        throw InputError("PCA dimension " + std::to_string(d) + " outside [1, " +
                         std::to_string(std::min(D, N)) + "]");

    PcaModel<Scalar> model;
    model.mean = train.values().rowwise().mean();
    const Matrix<Scalar> centered = train.values().colwise() - model.mean;
    Eigen::BDCSVD<Matrix<Scalar>> svd(centered, Eigen::ComputeThinU);
    model.projection = svd.matrixU().leftCols(d).transpose();
    for (Index r = 0; r < d; ++r) {
        Index pivot = 0;
        model.projection.row(r).cwiseAbs().maxCoeff(&pivot);
        if (model.projection(r, pivot) < Scalar(0)) model.projection.row(r) *= Scalar(-1);
    }
    return model;
}

template <typename Scalar, typename Derived>
Vector<Scalar> apply_pca(const PcaModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
    require(x.rows() == model.input_dim() && x.cols() == 1,
            "PCA input has dimension " + std::to_string(x.rows()) + ", model expects " +
                std::to_string(model.input_dim()));
    return model.projection * (x - model.mean);
}

template <typename Scalar>
SampleMatrix<Scalar> apply_pca(const PcaModel<Scalar>& model, const SampleMatrix<Scalar>& samples) {
    require(samples.dim() == model.input_dim(),
            "PCA input has dimension " + std::to_string(samples.dim()) + ", model expects " +
                std::to_string(model.input_dim()));
    if (samples.empty()) return {Matrix<Scalar>(model.output_dim(), 0), samples.partition()};
    Matrix<Scalar> projected = model.projection * (samples.values().colwise() - model.mean);
    return {std::move(projected), samples.partition()};
}

/// Columns at `indices`, regrouped by class in partition order and ascending
/// column order within a class. Classes left without columns are dropped.
template <typename Scalar>
SampleMatrix<Scalar> select_columns(const SampleMatrix<Scalar>& samples, std::vector<Index> indices) {
    std::sort(indices.begin(), indices.end());
    require(std::adjacent_find(indices.begin(), indices.end()) == indices.end(),
            "duplicate column index in selection");
    const auto& part = samples.partition();
    Matrix<Scalar> values(samples.dim(), static_cast<Index>(indices.size()));
    std::vector<std::string> ids;
    std::vector<Index> counts;
    Index out = 0;
    for (Index k = 0; k < part.num_classes(); ++k) {
        Index count = 0;
        for (Index j : indices) {
            if (j < part.begin(k) || j >= part.end(k)) continue;
            values.col(out++) = samples.values().col(j);
            ++count;
        }
        if (count > 0) {
            ids.push_back(part.class_id(k));
            counts.push_back(count);
        }
    }
    require(out == static_cast<Index>(indices.size()), "column index out of range in selection");
    return {std::move(values), ClassPartition::from_counts(std::move(ids), counts)};
}

template <typename Scalar>
struct DataSplit {
    SampleMatrix<Scalar> train;
    SampleMatrix<Scalar> holdout;
};

namespace detail {

template <typename Scalar, typename CountFn>
DataSplit<Scalar> split_per_class(const SampleMatrix<Scalar>& samples, std::uint64_t seed,
                                  CountFn train_count) {
    const auto& part = samples.partition();
    std::vector<Index> train_idx;
    std::vector<Index> holdout_idx;
    for (Index k = 0; k < part.num_classes(); ++k) {
        std::vector<Index> local(static_cast<std::size_t>(part.size(k)));
        std::iota(local.begin(), local.end(), part.begin(k));
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        rng.shuffle(local);
        const auto take = static_cast<std::size_t>(train_count(part.size(k), part.class_id(k)));
        train_idx.insert(train_idx.end(), local.begin(), local.begin() + static_cast<std::ptrdiff_t>(take));
        holdout_idx.insert(holdout_idx.end(), local.begin() + static_cast<std::ptrdiff_t>(take), local.end());
    }
    return {select_columns(samples, std::move(train_idx)),
            select_columns(samples, std::move(holdout_idx))};
}

} // namespace detail

/// Exactly `n_per_class` random training columns from every class; the rest
/// form the holdout. Deterministic for a given seed.
template <typename Scalar>
DataSplit<Scalar> subsample_per_class(const SampleMatrix<Scalar>& samples, Index n_per_class,
                                      std::uint64_t seed) {
    require(n_per_class >= 1, "n_per_class must be positive");
    return detail::split_per_class(samples, seed, [&](Index available, const std::string& id) {
        if (available < n_per_class)
            throw InputError("class '" + id + "' has " + std::to_string(available) +
                             " samples, fewer than the requested " + std::to_string(n_per_class));
        return n_per_class;
    });
}

/// floor(fraction * N_k) training columns per class (at least one, and at
/// least one left for holdout when the class has two or more samples).
template <typename Scalar>
DataSplit<Scalar> split_fraction_per_class(const SampleMatrix<Scalar>& samples, double fraction,
                                           std::uint64_t seed) {
    require(fraction > 0.0 && fraction < 1.0, "train fraction must lie in (0, 1)");
    return detail::split_per_class(samples, seed, [&](Index available, const std::string&) {
        auto take = static_cast<Index>(std::floor(fraction * static_cast<double>(available)));
        take = std::max<Index>(take, 1);
        if (available >= 2) take = std::min(take, available - 1);
        return take;
    });
}

} // namespace nscr
