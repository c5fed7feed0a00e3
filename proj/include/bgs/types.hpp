#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace bgs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Violated precondition or invariant (bad parameters, dimension mismatch, ...).
class ConstraintError : public std::runtime_error {
 public:
  explicit ConstraintError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file (matrix files, datasets, configs).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure on otherwise valid input (breakdown, singular estimate, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Shared tolerance constants. `exact_path` guards quantities computed through
// an eigendecomposition or support enumeration; `algebraic` guards identities
// that hold to rounding error.
namespace tol {
inline constexpr double exact_path = 1e-9;
inline constexpr double algebraic = 1e-12;
inline constexpr double spd_slack = 1e-10;  // relative eigenvalue slack in SPD validation
}  // namespace tol

}  // namespace bgs
