#pragma once

#include "nscr/core.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nscr {

/// Knobs of the ADMM coder. Defaults follow the reference experiments
/// (rho = 10, tol = 1e-3, 20 iterations).
template <typename Scalar>
struct SolverConfig {
    Scalar alpha = Scalar(0.01);  // l2 weight
    Scalar beta = Scalar(0.01);   // l1 weight (linear term on the non-negative orthant)
    Scalar rho = Scalar(10);      // augmented Lagrangian penalty
    Scalar tol = Scalar(1e-3);    // absolute tolerance on all three residuals
    int max_iter = 20;

    /// Diagonal shift of the c-update system: (2 alpha + rho) / 2.
    Scalar shift() const { return (Scalar(2) * alpha + rho) / Scalar(2); }

    void validate() const {
        require(std::isfinite(double(alpha)) && alpha >= Scalar(0), "alpha must be finite and >= 0");
        require(std::isfinite(double(beta)) && beta >= Scalar(0), "beta must be finite and >= 0");
        require(std::isfinite(double(rho)) && rho > Scalar(0), "rho must be finite and > 0");
        require(std::isfinite(double(tol)) && tol >= Scalar(0), "tol must be finite and >= 0");
        require(max_iter >= 1, "max_iter must be >= 1");
    }
};

using SolverConfigd = SolverConfig<double>;

enum class GramMode { Direct, Woodbury };

inline const char* to_string(GramMode mode) {
    return mode == GramMode::Direct ? "direct" : "woodbury";
}

/// Cached Cholesky factor for applying (X^T X + s I)^{-1}.
///
/// Direct mode factors the N x N matrix X^T X + s I. Woodbury mode factors
/// the D x D matrix I + (1/s) X X^T and applies
///     (X^T X + s I)^{-1} r = r/s - X^T (I + X X^T / s)^{-1} X r / s^2.
/// The dictionary itself is not stored; callers pass the same X to apply().
template <typename Scalar>
class PrecomputedGram {
public:
    using MatrixType = Matrix<Scalar>;
    using VectorType = Vector<Scalar>;

    template <typename Derived>
    static PrecomputedGram with_shift(const Eigen::MatrixBase<Derived>& X, Scalar shift,
                                      std::optional<GramMode> mode_override = std::nullopt) {
        require(shift > Scalar(0) && std::isfinite(double(shift)), "gram shift must be positive and finite");
        require(X.rows() >= 1 && X.cols() >= 1, "gram needs a non-empty dictionary");
        if (!X.allFinite()) throw NumericError("gram factorization: dictionary has non-finite entries");

        PrecomputedGram gram;
        gram.rows_ = X.rows();
        gram.cols_ = X.cols();
        gram.shift_ = shift;
        gram.mode_ = mode_override.value_or(X.cols() > X.rows() ? GramMode::Woodbury : GramMode::Direct);

        MatrixType system;
        if (gram.mode_ == GramMode::Direct) {
            system = MatrixType(X.cols(), X.cols());
            system.setZero();
            system.template selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
            system.diagonal().array() += shift;
        } else {
            system = MatrixType(X.rows(), X.rows());
            system.setZero();
            system.template selfadjointView<Eigen::Lower>().rankUpdate(X, Scalar(1) / shift);
            system.diagonal().array() += Scalar(1);
        }
        gram.llt_.compute(system);
        if (gram.llt_.info() != Eigen::Success || !gram.llt_.matrixLLT().allFinite())
            throw NumericError("gram factorization failed");
        return gram;
    }

    /// Factor for the NSCR c-update: shift (2 alpha + rho) / 2.
    template <typename Derived>
    static PrecomputedGram for_admm(const Eigen::MatrixBase<Derived>& X, Scalar alpha, Scalar rho,
                                    std::optional<GramMode> mode_override = std::nullopt) {
        require(alpha >= Scalar(0), "alpha must be >= 0");
        require(rho > Scalar(0), "rho must be > 0");
        return with_shift(X, (Scalar(2) * alpha + rho) / Scalar(2), mode_override);
    }

    GramMode mode() const { return mode_; }
    Scalar shift() const { return shift_; }
    Index rows() const { return rows_; }
    Index cols() const { return cols_; }

    /// Lower-triangular Cholesky factor of the factored system.
    MatrixType factor() const { return llt_.matrixL(); }

    /// (X^T X + shift I)^{-1} rhs.
    template <typename Derived, typename RhsDerived>
    VectorType apply(const Eigen::MatrixBase<Derived>& X, const Eigen::MatrixBase<RhsDerived>& rhs) const {
        require(X.rows() == rows_ && X.cols() == cols_, "gram was built for a different dictionary shape");
        require(rhs.size() == cols_, "right-hand side length does not match dictionary width");
        if (mode_ == GramMode::Direct) return llt_.solve(rhs);
        const Scalar a = Scalar(1) / shift_;
        const VectorType inner = llt_.solve(X * rhs);
        return a * rhs - (a * a) * (X.transpose() * inner);
    }

    bool matches(Index rows, Index cols, Scalar shift) const {
        return rows == rows_ && cols == cols_ &&
               std::abs(double(shift - shift_)) <= 1e-14 * std::max(1.0, std::abs(double(shift_)));
    }

private:
    PrecomputedGram() = default;

    Eigen::LLT<MatrixType> llt_;
    GramMode mode_ = GramMode::Direct;
    Scalar shift_ = Scalar(1);
    Index rows_ = 0;
    Index cols_ = 0;
};

/// Memoized factorizations for one dictionary, keyed on (shift, mode).
/// Changing beta does not change the shift, so beta sweeps share a factor.
template <typename Scalar>
class GramCache {
public:
    using Gram = PrecomputedGram<Scalar>;

    explicit GramCache(std::shared_ptr<const Matrix<Scalar>> X) : X_(std::move(X)) {
        require(X_ != nullptr, "gram cache needs a dictionary");
    }

    std::shared_ptr<const Gram> get(Scalar shift, std::optional<GramMode> mode = std::nullopt) const {
        const GramMode resolved = mode.value_or(X_->cols() > X_->rows() ? GramMode::Woodbury : GramMode::Direct);
        const std::pair<Scalar, int> key{shift, static_cast<int>(resolved)};
        std::lock_guard lock(mutex_);
        auto it = entries_.find(key);
        if (it != entries_.end()) return it->second;
        auto gram = std::make_shared<const Gram>(Gram::with_shift(*X_, shift, resolved));
        entries_.emplace(key, gram);
        return gram;
    }

    const Matrix<Scalar>& dictionary() const { return *X_; }
    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return entries_.size();
    }

private:
    std::shared_ptr<const Matrix<Scalar>> X_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<Scalar, int>, std::shared_ptr<const Gram>> entries_;
};

template <typename Scalar>
struct SolverWorkspace {
    Vector<Scalar> c;
    Vector<Scalar> z;
    Vector<Scalar> delta;
    int iter = 0;

    explicit SolverWorkspace(Index n)
        : c(Vector<Scalar>::Zero(n)), z(Vector<Scalar>::Zero(n)), delta(Vector<Scalar>::Zero(n)) {}
};

/// Per-iteration residual norms ||z-c||, ||c_{t+1}-c_t||, ||z_{t+1}-z_t||.
template <typename Scalar>
struct ResidualHistory {
    std::vector<Scalar> zc_gap;
    std::vector<Scalar> dc;
    std::vector<Scalar> dz;

    std::size_t size() const { return zc_gap.size(); }
};

template <typename Scalar>
struct SolveResult {
    Vector<Scalar> coding;   // final z, non-negative for the NSCR coder
    Vector<Scalar> c_final;
    int iterations = 0;
    ResidualHistory<Scalar> history;
    bool converged = false;
};

/// c = (X^T X + shift I)^{-1} (X^T y + rho/2 z + delta/2 - beta/2 * 1).
template <typename Scalar, typename Derived>
Vector<Scalar> update_c_xty(const SolverWorkspace<Scalar>& ws, const Eigen::MatrixBase<Derived>& X,
                            const Vector<Scalar>& xty, const SolverConfig<Scalar>& cfg,
                        const PrecomputedGram<Scalar>& gram) {
    require(xty.size() == X.cols() && ws.z.size() == X.cols() && ws.delta.size() == X.cols(),
            "c-update dimension mismatch");
    Vector<Scalar> rhs = xty + (cfg.rho / Scalar(2)) * ws.z + ws.delta / Scalar(2);
    rhs.array() -= cfg.beta / Scalar(2);
    return gram.apply(X, rhs);
}

/// Same update computing X^T y from the query.
template <typename Scalar, typename Derived, typename QueryDerived>
Vector<Scalar> update_c(const SolverWorkspace<Scalar>& ws, const Eigen::MatrixBase<Derived>& X,
                        const Eigen::MatrixBase<QueryDerived>& y, const SolverConfig<Scalar>& cfg,
                        const PrecomputedGram<Scalar>& gram) {
    require(y.rows() == X.rows(), "query length does not match dictionary rows");
    const Vector<Scalar> xty = X.transpose() * y;
    return update_c_xty(ws, X, xty, cfg, gram);
}

/// z = max(0, c - delta / rho), entrywise.
template <typename Scalar>
Vector<Scalar> update_z(const SolverWorkspace<Scalar>& ws, const SolverConfig<Scalar>& cfg) {
    return (ws.c - ws.delta / cfg.rho).cwiseMax(Scalar(0));
}

/// delta + rho (z - c).
template <typename Scalar>
Vector<Scalar> update_dual(const SolverWorkspace<Scalar>& ws, const SolverConfig<Scalar>& cfg) {
    return ws.delta + cfg.rho * (ws.z - ws.c);
}

template <typename Scalar>
bool check_convergence(Scalar zc_gap, Scalar dc, Scalar dz, Scalar tol) {
    return zc_gap <= tol && dc <= tol && dz <= tol;
}

namespace detail {

/// ADMM skeleton shared by the NSCR and l1 coders. `prox` maps (c - delta/rho)
/// to the new z; `linear` is the constant subtracted entrywise in the c-update.
template <typename Scalar, typename Derived, typename Prox>
SolveResult<Scalar> run_admm(const Eigen::MatrixBase<Derived>& X, const Vector<Scalar>& xty,
                             const SolverConfig<Scalar>& cfg, const PrecomputedGram<Scalar>& gram,
                             Prox&& prox) {
    const Index n = X.cols();
    SolverWorkspace<Scalar> ws(n);
    SolveResult<Scalar> result;
    result.history.zc_gap.reserve(static_cast<std::size_t>(cfg.max_iter));
    result.history.dc.reserve(static_cast<std::size_t>(cfg.max_iter));
    result.history.dz.reserve(static_cast<std::size_t>(cfg.max_iter));

    for (int t = 0; t < cfg.max_iter; ++t) {
        Vector<Scalar> c_next = update_c_xty(ws, X, xty, cfg, gram);
        Vector<Scalar> z_next = prox(Vector<Scalar>(c_next - ws.delta / cfg.rho));
        Vector<Scalar> d_next = ws.delta + cfg.rho * (z_next - c_next);
        if (!c_next.allFinite() || !z_next.allFinite() || !d_next.allFinite())
            throw NumericError("ADMM produced non-finite values at iteration " + std::to_string(t + 1));

        const Scalar zc = (z_next - c_next).norm();
        const Scalar dc = (c_next - ws.c).norm();
        const Scalar dz = (z_next - ws.z).norm();
        result.history.zc_gap.push_back(zc);
        result.history.dc.push_back(dc);
        result.history.dz.push_back(dz);

        ws.c = std::move(c_next);
        ws.z = std::move(z_next);
        ws.delta = std::move(d_next);
        ws.iter = t + 1;

        if (check_convergence(zc, dc, dz, cfg.tol)) {
            result.converged = true;
            break;
        }
    }
    result.iterations = ws.iter;
    result.coding = std::move(ws.z);
    result.c_final = std::move(ws.c);
    return result;
}

} // namespace detail

/// Non-negative elastic-net coding of y over X by ADMM:
///     min ||y - X c||^2 + alpha ||c||^2 + beta 1^T c   s.t. c >= 0.
/// Starts from c = z = delta = 0 and returns z (always feasible), even when
/// the iteration cap is reached first.
template <typename Scalar, typename Derived, typename QueryDerived>
SolveResult<Scalar> solve(const Eigen::MatrixBase<Derived>& X, const Eigen::MatrixBase<QueryDerived>& y,
                          const SolverConfig<Scalar>& cfg, const PrecomputedGram<Scalar>& gram) {
    cfg.validate();
    require(y.rows() == X.rows() && y.cols() == 1, "query length does not match dictionary rows");
    require(gram.matches(X.rows(), X.cols(), cfg.shift()),
            "precomputed gram does not match dictionary shape or (alpha, rho)");
    const Vector<Scalar> xty = X.transpose() * y;
    return detail::run_admm(X, xty, cfg, gram, [](const Vector<Scalar>& v) {
        return Vector<Scalar>(v.cwiseMax(Scalar(0)));
    });
}

/// Convenience overload that factors the system itself.
template <typename Scalar, typename Derived, typename QueryDerived>
SolveResult<Scalar> solve(const Eigen::MatrixBase<Derived>& X, const Eigen::MatrixBase<QueryDerived>& y,
                          const SolverConfig<Scalar>& cfg) {
    cfg.validate();
    const auto gram = PrecomputedGram<Scalar>::for_admm(X, cfg.alpha, cfg.rho);
    return solve(X, y, cfg, gram);
}

/// l1-regularized coding min ||y - X c||^2 + lambda ||c||_1 with the same
/// splitting: shift rho/2 in the c-update, soft threshold at lambda/rho for z.
/// `cfg.alpha` and `cfg.beta` are ignored.
template <typename Scalar, typename Derived, typename QueryDerived>
SolveResult<Scalar> solve_lasso(const Eigen::MatrixBase<Derived>& X, const Eigen::MatrixBase<QueryDerived>& y,
                                Scalar lambda, SolverConfig<Scalar> cfg, const PrecomputedGram<Scalar>& gram) {
    require(lambda > Scalar(0), "lambda must be > 0");
    cfg.alpha = Scalar(0);
    cfg.beta = Scalar(0);
    cfg.validate();
    require(y.rows() == X.rows() && y.cols() == 1, "query length does not match dictionary rows");
    require(gram.matches(X.rows(), X.cols(), cfg.shift()), "precomputed gram does not match (rho/2) shift");
    const Vector<Scalar> xty = X.transpose() * y;
    const Scalar threshold = lambda / cfg.rho;
    return detail::run_admm(X, xty, cfg, gram, [threshold](const Vector<Scalar>& v) {
        return Vector<Scalar>(v.array().sign() * (v.array().abs() - threshold).max(Scalar(0)));
    });
}

} // namespace nscr
