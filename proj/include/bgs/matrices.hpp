#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "bgs/types.hpp"

namespace bgs {

/// Dense symmetric positive definite matrix.
///
/// Construction symmetrizes the input as (M + M^T)/2, which is bit-exactly
/// symmetric, and validates the spectrum: the smallest eigenvalue must exceed
/// -tol::spd_slack * lambda_max, otherwise a ConstraintError is thrown.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix entries);

  Index n() const { return a_.rows(); }
  const Matrix& data() const { return a_; }
  double operator()(Index i, Index j) const { return a_(i, j); }

  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }

  /// Symmetric square root A^{1/2} (fresh eigendecomposition per call).
  Matrix sqrt() const;
  /// Symmetric inverse square root A^{-1/2}.
  Matrix inv_sqrt() const;
  /// Inverse via eigendecomposition.
  Matrix inverse() const;

 private:
  Matrix a_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
};

/// Parameters for the matrix ensembles used in the experiments.
struct EnsembleSpec {
  enum class Kind { AlphaBeta, LinspaceEig, Wishart, Sobolev, Circulant, Tridiagonal };

  Kind kind = Kind::AlphaBeta;
  Index n = 0;
  double alpha = 1.0;      // AlphaBeta
  double beta = 0.0;       // AlphaBeta
  double kappa_max = 10.0; // LinspaceEig: eigenvalues linspace(1, kappa_max)
  Index m = 0;             // Wishart: rows of the Gaussian factor, m >= n
  double delta = 0.1;      // Tridiagonal: target minimum eigenvalue, 0 < delta < 1
  std::uint64_t seed = 0;

  void validate() const;
  std::string describe() const;
};

/// A x = b with the solution kept alongside when known.
struct LinearSystem {
  SpdMatrix a;
  Vector b;
  std::optional<Vector> x_star;

  LinearSystem(SpdMatrix a_in, Vector b_in, std::optional<Vector> x_star_in = std::nullopt);

  /// The stored solution, or a fresh direct solve when absent.
  Vector solution() const;
};

/// alpha*I + (beta/n) * ones*ones^T; requires n >= 1, alpha > 0, alpha + beta > 0.
SpdMatrix make_alpha_beta(Index n, double alpha, double beta);

/// Deterministic ensemble generator; identical parameters + seed reproduce
/// the matrix bit-for-bit.
SpdMatrix generate_ensemble(const EnsembleSpec& spec);

/// sqrt(v^T A v).
double a_norm(const SpdMatrix& a, const Vector& v);

/// (x - x_star)^T A (x - x_star) / (x_star^T A x_star). Squared relative error.
double rel_err_a_norm(const SpdMatrix& a, const Vector& x, const Vector& x_star);

/// Plain-text matrix format: header "spdmat 1 <n>", then n rows of n floats.
void write_matrix(const std::string& path, const SpdMatrix& a);
SpdMatrix read_matrix(const std::string& path);

/// Right-hand side with iid standard normal entries.
Vector gaussian_rhs(Index n, std::uint64_t seed);

/// Solve A x = b by Cholesky.
Vector direct_solve(const SpdMatrix& a, const Vector& b);

/// Convenience: builds the system and computes x_star directly.
LinearSystem make_system(SpdMatrix a, Vector b);

}  // namespace bgs
