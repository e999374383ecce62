#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace shls {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A real function on the finite state space, one value per state.
using StateFunction = Vector;

/// Maps a time (or height) to a function on the state space, e.g. t -> T_t f.
using Sampler = std::function<Vector(double)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised when an integration rule cannot meet its tolerance.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shls
