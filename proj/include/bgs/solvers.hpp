#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bgs/matrices.hpp"
#include "bgs/sketch.hpp"
#include "bgs/types.hpp"

namespace bgs {

/// Tuple (mu, nu, tau, L) driving the accelerated recurrences.
struct AccelConstants {
  double mu = 0.0;
  double nu = 1.0;
  double tau = 0.0;  // sqrt(mu/nu)
  double lipschitz = 1.0;

  /// Validates 0 < mu <= 1, nu >= 1 and sets tau = sqrt(mu/nu).
  static AccelConstants from_mu_nu(double mu, double nu, double lipschitz = 1.0);
};

struct TraceRow {
  long iter = 0;
  double seconds = 0.0;
  double rel_err = 0.0;
  double f_value = 0.0;
};

/// Per-iteration error record of one solver run. Row k describes iterate k;
/// row 0 is the starting point. `seconds` accumulates update time only.
struct ConvergenceTrace {
  std::vector<TraceRow> rows;
  std::string solver_id;
  std::uint64_t seed = 0;

  /// The iterate described by the last row.
  Vector final_iterate;

  // Filled only when SolveOptions::record_iterates is set.
  std::vector<Vector> iterates;
  std::vector<IndexSet> picked;

  /// First iterate k with rel_err <= threshold, or -1 when never reached.
  long iterations_to(double threshold) const;
  double final_rel_err() const { return rows.empty() ? 0.0 : rows.back().rel_err; }

  /// CSV with header `iter,seconds,rel_err,f_value`; `metadata` lines are
  /// written first as '#'-prefixed comments.
  void write_csv(std::ostream& out, const std::vector<std::string>& metadata = {}) const;
  void write_csv_file(const std::string& path, const std::vector<std::string>& metadata = {}) const;
};

struct SolveOptions {
  long iters = 0;
  std::uint64_t seed = 0;
  double stop_rel_err = -1.0;     // stop once rel_err falls to this; <0 disables
  bool record_iterates = false;   // keep iterate vectors and picked sets in the trace
};

/// One exact block solve: the n-vector supported on j whose j-restriction
/// solves A_J w = residual_J (thresholded pseudo-inverse when A_J is
/// singular).
Vector block_step(const SpdMatrix& a, const Vector& residual, const IndexSet& j);

/// Randomized block Gauss-Seidel: x <- x - S(S^T A S)^+ S^T (A x - b).
ConvergenceTrace gauss_seidel(const LinearSystem& sys, const SketchSampler& sampler,
                              const Vector& x0, const SolveOptions& opts);

/// Nesterov-accelerated block Gauss-Seidel; the trace records the y iterates.
ConvergenceTrace accel_gauss_seidel(const LinearSystem& sys, const SketchSampler& sampler,
                                    const Vector& x0, const AccelConstants& consts,
                                    const SolveOptions& opts);

/// Accelerated coordinate descent over a fixed partition with block
/// preconditioners B_i = A_{J_i} (so every block Lipschitz constant is 1 and
/// sampling is uniform). The strong-convexity constant in the block-diagonal
/// norm is computed at setup.
ConvergenceTrace accel_coordinate_descent(const LinearSystem& sys,
                                          const std::vector<IndexSet>& blocks, const Vector& x0,
                                          const SolveOptions& opts);

/// Scalar state of the ACDM recursion at one iteration.
struct AcdmState {
  double big_a = 0.0;   // A_k
  double big_b = 0.0;   // B_k
  double a_next = 0.0;  // a_{k+1}
  double alpha = 0.0;
  double beta = 0.0;
  double sigma = 0.0;
};

struct AcdmLog {
  double sigma = 0.0;
  std::vector<IndexSet> blocks;
  std::vector<double> block_probs;
  std::vector<AcdmState> steps;
};

/// ACDM scalar recursion specialized to block Gauss-Seidel on a fixed
/// partition, with the modified initialization A_0 = 1, B_0 = sigma that makes
/// it coincide with accel_coordinate_descent on the same rng stream. The trace
/// records the x iterates (the returned sequence). sigma < 0 means "compute".
ConvergenceTrace acdm(const LinearSystem& sys, const std::vector<IndexSet>& blocks,
                      const Vector& x0, const SolveOptions& opts, double sigma = -1.0,
                      AcdmLog* log = nullptr);

/// Randomized block Kaczmarz for a consistent overdetermined system
/// (m x n, full column rank, b in range(A)); sampler draws row sets.
/// The trace records ||x_k - x_*||_2 / ||x_*||_2.
ConvergenceTrace kaczmarz(const Matrix& a, const Vector& b, const SketchSampler& row_sampler,
                          const Vector& x0, const SolveOptions& opts);

/// Accelerated randomized block Kaczmarz.
ConvergenceTrace accel_kaczmarz(const Matrix& a, const Vector& b, const SketchSampler& row_sampler,
                                const Vector& x0, const AccelConstants& consts,
                                const SolveOptions& opts);

/// Conjugate gradient; stops when ||A x - b|| <= tol ||b|| or at max_iters.
ConvergenceTrace conjugate_gradient(const LinearSystem& sys, const Vector& x0, double tol,
                                    long max_iters);

/// V = f(y) - f_* + (mu/2) ||z - x_*||^2_{G^{-1}}; g_inverse is the exact
/// inverse of G = E[H].
double lyapunov_value(const LinearSystem& sys, const AccelConstants& consts,
                      const SpdMatrix& g_inverse, const Vector& y, const Vector& z);

/// Strong convexity constant of f w.r.t. the blkdiag(A_J)^{-1} norm,
/// i.e. lambda_min(blkdiag(A_J^{-1}) A) = (n/p) mu_part for equal blocks.
double block_diag_strong_convexity(const SpdMatrix& a, const std::vector<IndexSet>& blocks);

}  // namespace bgs
