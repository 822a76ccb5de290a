#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ucgrad {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unroll would step past the system horizon.
struct HorizonError : Error {
  using Error::Error;
};

// A loss or gradient came back non-finite; carries the step or particle
// index so divergent inner problems can be located.
struct NonFiniteError : Error {
  using Error::Error;
};

// Operation needs a capability (usually Jacobians) the system lacks.
struct CapabilityError : Error {
  using Error::Error;
};

// Config-file or argument validation failure; message names the field.
struct ConfigError : Error {
  using Error::Error;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace ucgrad
