#pragma once

#include "nscr/data.hpp"
#include "nscr/solver.hpp"

#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>

namespace nscr {

/// Non-negative sparse + collaborative coder (ADMM).
template <typename Scalar>
struct NscrCoder {
    SolverConfig<Scalar> config;
};

/// Ridge coder, closed form (X^T X + lambda I)^{-1} X^T y.
template <typename Scalar>
struct CrcCoder {
    Scalar lambda = Scalar(0.001);
};

/// Plain non-negative least squares; alpha and beta are forced to zero.
template <typename Scalar>
struct NrcCoder {
    SolverConfig<Scalar> config;
};

/// l1 coder sharing the ADMM skeleton with a soft-threshold z-step.
template <typename Scalar>
struct SrcCoder {
    Scalar lambda = Scalar(0.001);
    SolverConfig<Scalar> config;
};

template <typename Scalar>
using CoderKind = std::variant<NscrCoder<Scalar>, CrcCoder<Scalar>, NrcCoder<Scalar>, SrcCoder<Scalar>>;

template <typename Scalar>
const char* coder_name(const CoderKind<Scalar>& coder) {
    return std::visit(
        [](const auto& c) -> const char* {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, NscrCoder<Scalar>>) return "nscr";
            else if constexpr (std::is_same_v<T, CrcCoder<Scalar>>) return "crc";
            else if constexpr (std::is_same_v<T, NrcCoder<Scalar>>) return "nrc";
            else return "src";
        },
        coder);
}

namespace detail {

template <typename Scalar>
SolverConfig<Scalar> nrc_config(SolverConfig<Scalar> cfg) {
    cfg.alpha = Scalar(0);
    cfg.beta = Scalar(0);
    return cfg;
}

} // namespace detail

/// Diagonal shift of the regularized Gram matrix each coder factors.
template <typename Scalar>
Scalar gram_shift(const CoderKind<Scalar>& coder) {
    return std::visit(
        [](const auto& c) -> Scalar {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, NscrCoder<Scalar>>) {
                c.config.validate();
                return c.config.shift();
            } else if constexpr (std::is_same_v<T, CrcCoder<Scalar>>) {
                require(c.lambda > Scalar(0), "CRC lambda must be > 0");
                return c.lambda;
            } else if constexpr (std::is_same_v<T, NrcCoder<Scalar>>) {
                c.config.validate();
                return c.config.rho / Scalar(2);
            } else {
                require(c.lambda > Scalar(0), "SRC lambda must be > 0");
                c.config.validate();
                return c.config.rho / Scalar(2);
            }
        },
        coder);
}

template <typename Scalar, typename Derived, typename QueryDerived>
Vector<Scalar> code_crc(const Eigen::MatrixBase<Derived>& X, const Eigen::MatrixBase<QueryDerived>& y,
                        Scalar lambda, const PrecomputedGram<Scalar>& gram) {
    require(lambda > Scalar(0), "CRC lambda must be > 0");
    require(gram.matches(X.rows(), X.cols(), lambda), "gram does not match CRC lambda");
    const Vector<Scalar> xty = X.transpose() * y;
    return gram.apply(X, xty);
}

template <typename Scalar, typename Derived, typename QueryDerived>
Vector<Scalar> code_crc(const Eigen::MatrixBase<Derived>& X, const Eigen::MatrixBase<QueryDerived>& y,
                        Scalar lambda) {
    require(lambda > Scalar(0), "CRC lambda must be > 0");
    return code_crc(X, y, lambda, PrecomputedGram<Scalar>::with_shift(X, lambda));
}

template <typename Scalar, typename Derived, typename QueryDerived>
SolveResult<Scalar> code_nrc(const Eigen::MatrixBase<Derived>& X, const Eigen::MatrixBase<QueryDerived>& y,
                             const SolverConfig<Scalar>& cfg, const PrecomputedGram<Scalar>& gram) {
    return solve(X, y, detail::nrc_config(cfg), gram);
}

template <typename Scalar, typename Derived, typename QueryDerived>
SolveResult<Scalar> code_nrc(const Eigen::MatrixBase<Derived>& X, const Eigen::MatrixBase<QueryDerived>& y,
                             const SolverConfig<Scalar>& cfg) {
    return solve(X, y, detail::nrc_config(cfg));
}

template <typename Scalar, typename Derived, typename QueryDerived>
SolveResult<Scalar> code_src(const Eigen::MatrixBase<Derived>& X, const Eigen::MatrixBase<QueryDerived>& y,
                             Scalar lambda, const SolverConfig<Scalar>& cfg, const PrecomputedGram<Scalar>& gram) {
    return solve_lasso(X, y, lambda, cfg, gram);
}

template <typename Scalar, typename Derived, typename QueryDerived>
SolveResult<Scalar> code_src(const Eigen::MatrixBase<Derived>& X, const Eigen::MatrixBase<QueryDerived>& y,
                             Scalar lambda, const SolverConfig<Scalar>& cfg) {
    const auto gram = PrecomputedGram<Scalar>::with_shift(X, cfg.rho / Scalar(2));
    return solve_lasso(X, y, lambda, cfg, gram);
}

/// Coding vector of an already-normalized query under `coder`.
template <typename Scalar, typename Derived, typename QueryDerived>
Vector<Scalar> code_query(const Eigen::MatrixBase<Derived>& X, const Eigen::MatrixBase<QueryDerived>& y,
                          const CoderKind<Scalar>& coder, const PrecomputedGram<Scalar>& gram) {
    return std::visit(
        [&](const auto& c) -> Vector<Scalar> {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, NscrCoder<Scalar>>) return solve(X, y, c.config, gram).coding;
            else if constexpr (std::is_same_v<T, CrcCoder<Scalar>>) return code_crc(X, y, c.lambda, gram);
            else if constexpr (std::is_same_v<T, NrcCoder<Scalar>>) return code_nrc(X, y, c.config, gram).coding;
            else return code_src(X, y, c.lambda, c.config, gram).coding;
        },
        coder);
}

/// r_k = ||y - X_k c_k||_2 over the class blocks of `partition`.
template <typename Derived, typename QueryDerived, typename CodingDerived>
Vector<typename Derived::Scalar> class_residuals(const Eigen::MatrixBase<Derived>& X, const ClassPartition& partition,
                                                 const Eigen::MatrixBase<QueryDerived>& y,
                                                 const Eigen::MatrixBase<CodingDerived>& coding) {
    using Scalar = typename Derived::Scalar;
    require(coding.size() == X.cols(), "coding length does not match dictionary width");
    require(partition.num_samples() == X.cols(), "partition does not cover the dictionary");
    require(y.rows() == X.rows(), "query length does not match dictionary rows");
    Vector<Scalar> residuals(partition.num_classes());
    for (Index k = 0; k < partition.num_classes(); ++k) {
        const Index first = partition.begin(k);
        const Index count = partition.size(k);
        residuals(k) = (y - X.middleCols(first, count) * coding.segment(first, count)).norm();
    }
    return residuals;
}

template <typename Scalar, typename QueryDerived, typename CodingDerived>
Vector<Scalar> class_residuals(const SampleMatrix<Scalar>& X, const Eigen::MatrixBase<QueryDerived>& y,
                               const Eigen::MatrixBase<CodingDerived>& coding) {
    return class_residuals(X.values(), X.partition(), y, coding);
}

/// Index of the smallest entry; ties go to the lowest index.
template <typename Derived>
Index argmin_first(const Eigen::MatrixBase<Derived>& values) {
    require(values.size() >= 1, "argmin of an empty vector");
    Index best = 0;
    for (Index k = 1; k < values.size(); ++k)
        if (values(k) < values(best)) best = k;
    return best;
}

template <typename Scalar>
struct ClassificationResult {
    Index class_index = 0;
    std::string label;
    Vector<Scalar> residuals;
    Vector<Scalar> coding;
};

/// Minimum class residual rule. X must already be column-normalized and
/// `cache` must be built on X.values(); y is normalized here.
template <typename Scalar, typename QueryDerived>
ClassificationResult<Scalar> classify(const SampleMatrix<Scalar>& X, const Eigen::MatrixBase<QueryDerived>& y,
                                      const CoderKind<Scalar>& coder, const GramCache<Scalar>& cache) {
    require(cache.dictionary().rows() == X.dim() && cache.dictionary().cols() == X.size(),
            "gram cache was built for a different dictionary");
    const Vector<Scalar> yn = normalize_query(y);
    const auto gram = cache.get(gram_shift(coder));
    ClassificationResult<Scalar> out;
    out.coding = code_query(X.values(), yn, coder, *gram);
    out.residuals = class_residuals(X.values(), X.partition(), yn, out.coding);
    out.class_index = argmin_first(out.residuals);
    out.label = X.partition().class_id(out.class_index);
    return out;
}

/// Fitted classifier: normalized dictionary, class partition, coder and the
/// factorization it needs. Immutable; classify() is safe to call concurrently.
template <typename Scalar>
class ClassifierModel {
public:
    using Gram = PrecomputedGram<Scalar>;

    /// Normalizes the training columns and factors the coder's system.
    static ClassifierModel fit(const SampleMatrix<Scalar>& train, CoderKind<Scalar> coder,
                               std::optional<GramMode> mode = std::nullopt) {
        require(!train.empty(), "cannot fit a classifier on an empty training set");
        auto X = std::make_shared<const Matrix<Scalar>>(normalize_columns(train.values()));
        auto gram = std::make_shared<const Gram>(Gram::with_shift(*X, gram_shift(coder), mode));
        return ClassifierModel(std::move(X), train.partition(), std::move(coder), std::move(gram));
    }

    /// Builds a model over a dictionary that is already normalized, reusing
    /// (or filling) `cache`.
    static ClassifierModel from_cache(const std::shared_ptr<const Matrix<Scalar>>& X_normalized,
                                      const ClassPartition& partition, CoderKind<Scalar> coder,
                                      const GramCache<Scalar>& cache) {
        require(&cache.dictionary() == X_normalized.get(), "gram cache belongs to a different dictionary");
        auto gram = cache.get(gram_shift(coder));
        return ClassifierModel(X_normalized, partition, std::move(coder), std::move(gram));
    }

    template <typename QueryDerived>
    ClassificationResult<Scalar> classify(const Eigen::MatrixBase<QueryDerived>& y) const {
        require(y.rows() == X_->rows() && y.cols() == 1,
                "query has dimension " + std::to_string(y.rows()) + ", model expects " + std::to_string(X_->rows()));
        const Vector<Scalar> yn = normalize_query(y);
        ClassificationResult<Scalar> out;
        out.coding = code_query(*X_, yn, coder_, *gram_);
        out.residuals = class_residuals(*X_, partition_, yn, out.coding);
        out.class_index = argmin_first(out.residuals);
        out.label = partition_.class_id(out.class_index);
        return out;
    }

    const Matrix<Scalar>& dictionary() const { return *X_; }
    const ClassPartition& partition() const { return partition_; }
    const CoderKind<Scalar>& coder() const { return coder_; }
    const Gram& gram() const { return *gram_; }

private:
    ClassifierModel(std::shared_ptr<const Matrix<Scalar>> X, ClassPartition partition, CoderKind<Scalar> coder,
                    std::shared_ptr<const Gram> gram)
        : X_(std::move(X)), partition_(std::move(partition)), coder_(std::move(coder)), gram_(std::move(gram)) {
        require(partition_.num_samples() == X_->cols(), "partition does not cover the dictionary");
    }

    std::shared_ptr<const Matrix<Scalar>> X_;
    ClassPartition partition_;
    CoderKind<Scalar> coder_;
    std::shared_ptr<const Gram> gram_;
};

template <typename Scalar>
ClassifierModel<Scalar> fit_model(const SampleMatrix<Scalar>& train, CoderKind<Scalar> coder) {
    return ClassifierModel<Scalar>::fit(train, std::move(coder));
}

} // namespace nscr
