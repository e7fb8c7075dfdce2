#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace ala {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Operand shapes disagree (matrix dimensions, buffer sizes).
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Caller supplied data outside an operation's domain (non-finite values,
/// malformed labels, negative distances).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// API misuse: wrong call order, invalid ids, empty inputs where a value is
/// required, bad configuration.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A file could not be read/written or its content does not match what the
/// caller expects.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A checkpoint was readable but incompatible with the requested layout.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A runtime invariant check failed.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace ala
