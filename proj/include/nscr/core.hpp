#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace nscr {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (bad shapes, bad files, bad parameters).
class InputError : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown (non-finite values, failed factorization).
class NumericError : public Error {
public:
    using Error::Error;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
    return m.allFinite();
}

inline void require(bool condition, const std::string& message) {
    if (!condition) throw InputError(message);
}

} // namespace nscr
