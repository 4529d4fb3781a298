#pragma once

// Slow reference solvers for small instances of
//     min ||y - X c||^2 + alpha ||c||^2 + beta 1^T c   s.t. c >= 0.
// They share no code with the ADMM path and exist to validate it.

#include "nscr/core.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <string>

namespace nscr::oracle {

struct OracleConfig {
    double step_tol = 1e-10;   // stop when ||c - P(c - grad)|| <= step_tol
    long max_steps = 1'000'000;
    double backtrack = 0.5;    // step shrink factor

    void validate() const {
        require(step_tol > 0.0 && std::isfinite(step_tol), "step_tol must be positive");
        require(max_steps > 0, "max_steps must be positive");
        require(backtrack > 0.0 && backtrack < 1.0, "backtrack factor must lie in (0, 1)");
    }
};

template <typename DX, typename DY, typename DC>
typename DX::Scalar objective_value(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DY>& y,
                                    const Eigen::MatrixBase<DC>& c, typename DX::Scalar alpha,
                                    typename DX::Scalar beta) {
    return (y - X * c).squaredNorm() + alpha * c.squaredNorm() + beta * c.sum();
}

/// Gradient 2 X^T (X c - y) + 2 alpha c + beta 1.
template <typename DX, typename DY, typename DC>
Vector<typename DX::Scalar> objective_gradient(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DY>& y,
                                               const Eigen::MatrixBase<DC>& c, typename DX::Scalar alpha,
                                               typename DX::Scalar beta) {
    using Scalar = typename DX::Scalar;
    Vector<Scalar> g = Scalar(2) * (X.transpose() * (X * c - y)) + Scalar(2) * alpha * c;
    g.array() += beta;
    return g;
}

/// Projected gradient descent with backtracking on the non-negative orthant.
template <typename DX, typename DY>
Vector<typename DX::Scalar> reference_nscr(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DY>& y,
                                           typename DX::Scalar alpha, typename DX::Scalar beta,
                                           const OracleConfig& cfg = {}) {
    using Scalar = typename DX::Scalar;
    cfg.validate();
    require(y.rows() == X.rows(), "oracle: query length mismatch");
    require(alpha >= 0 && beta >= 0, "oracle: alpha and beta must be >= 0");

    const Index n = X.cols();
    // f(c) = c^T H c - 2 b^T c + beta 1^T c + const, so f(c + d) - f(c) = g^T d + d^T H d
    // exactly; the descent test compares d^T H d against |d|^2 / (2 step) without cancellation.
    Matrix<Scalar> H = X.transpose() * X;
    H.diagonal().array() += alpha;
    const Vector<Scalar> b = X.transpose() * y;
    auto grad = [&](const Vector<Scalar>& c) {
        Vector<Scalar> g = Scalar(2) * (H * c - b);
        g.array() += beta;
        return g;
    };

    Vector<Scalar> c = Vector<Scalar>::Zero(n);
    Scalar step = Scalar(1) / std::max(Scalar(2) * H.diagonal().sum(), Scalar(1e-12));
    for (long k = 0; k < cfg.max_steps; ++k) {
        const Vector<Scalar> g = grad(c);
        const Scalar pg_norm = (c - (c - g).cwiseMax(Scalar(0))).norm();
        if (pg_norm <= cfg.step_tol) return c;

        step /= Scalar(cfg.backtrack);  // try a longer step first
        for (;;) {
            const Vector<Scalar> trial = (c - step * g).cwiseMax(Scalar(0));
            const Vector<Scalar> diff = trial - c;
            const Scalar dd = diff.squaredNorm();
            if (dd == Scalar(0) || diff.dot(H * diff) <= dd / (Scalar(2) * step)) {
                c = trial;
                break;
            }
            step *= Scalar(cfg.backtrack);
        }
    }
    throw NumericError("reference_nscr: step_tol not reached within " + std::to_string(cfg.max_steps) +
                       " steps");
}

inline constexpr Index kActiveSetMaxAtoms = 12;

/// Exhaustive KKT enumeration over all 2^N supports (N <= 12, alpha > 0).
template <typename DX, typename DY>
Vector<typename DX::Scalar> reference_active_set(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DY>& y,
                                                 typename DX::Scalar alpha, typename DX::Scalar beta) {
    using Scalar = typename DX::Scalar;
    const Index n = X.cols();
    if (n > kActiveSetMaxAtoms)
        throw InputError("reference_active_set supports at most " + std::to_string(kActiveSetMaxAtoms) +
                         " atoms, got " + std::to_string(n));
    require(alpha > 0, "reference_active_set requires alpha > 0");
    require(beta >= 0, "beta must be >= 0");
    require(y.rows() == X.rows(), "oracle: query length mismatch");

    Matrix<Scalar> H = X.transpose() * X;
    H.diagonal().array() += alpha;
    const Vector<Scalar> b = X.transpose() * y;
    // Stationarity on the support S: H_SS c_S = b_S - beta/2.

    Vector<Scalar> best = Vector<Scalar>::Zero(n);
    Scalar best_obj = std::numeric_limits<Scalar>::infinity();
    const Scalar feas_tol = Scalar(1e-12);
    for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
        std::vector<Index> support;
        for (Index i = 0; i < n; ++i)
            if (mask & (1UL << i)) support.push_back(i);
        const auto s = static_cast<Index>(support.size());

        Vector<Scalar> c = Vector<Scalar>::Zero(n);
        if (s > 0) {
            Matrix<Scalar> Hs(s, s);
            Vector<Scalar> rhs(s);
            for (Index i = 0; i < s; ++i) {
                rhs(i) = b(support[i]) - beta / Scalar(2);
                for (Index j = 0; j < s; ++j) Hs(i, j) = H(support[i], support[j]);
            }
            const Vector<Scalar> cs = Hs.ldlt().solve(rhs);
            bool feasible = true;
            for (Index i = 0; i < s; ++i) {
                if (!(cs(i) >= -feas_tol)) feasible = false;
                c(support[i]) = std::max(cs(i), Scalar(0));
            }
            if (!feasible) continue;
        }
        Vector<Scalar> g = Scalar(2) * (H * c - b);
        g.array() += beta;
        bool dual_feasible = true;
        for (Index i = 0; i < n; ++i)
            if (!(mask & (1UL << i)) && g(i) < -Scalar(1e-10)) dual_feasible = false;
        if (!dual_feasible) continue;

        const Scalar obj = objective_value(X, y, c, alpha, beta);
        if (obj < best_obj) {
            best_obj = obj;
            best = c;
        }
    }
    if (!std::isfinite(double(best_obj))) throw NumericError("reference_active_set found no KKT point");
    return best;
}

} // namespace nscr::oracle
