#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>

namespace kronlp {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

// Unreadable or malformed files, bad run configuration.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure: non-finite objective, singular system, solver stall.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kronlp
