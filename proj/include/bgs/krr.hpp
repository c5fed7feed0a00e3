#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "bgs/matrices.hpp"
#include "bgs/sketch.hpp"
#include "bgs/solvers.hpp"
#include "bgs/types.hpp"

namespace bgs {

/// Feature rows with one target per row.
struct Dataset {
  Matrix x;  // n x d
  Vector y;  // n

  Index n() const { return x.rows(); }
  Index d() const { return x.cols(); }
};

/// CSV with d feature columns then one target column; '#' lines are comments.
Dataset load_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const Dataset& data);

/// Two-Gaussian blob dataset with +-1 labels, deterministic in the seed.
Dataset make_blobs(Index n, Index d, std::uint64_t seed);

/// K_ij = exp(-gamma ||x_i - x_j||^2) via the expanded distance form with
/// clamping at zero. Symmetric, unit diagonal, entries in (0, 1].
Matrix gaussian_kernel(const Dataset& data, double gamma);

struct KrrConfig {
  double gamma = 0.0;   // <= 0 means the 1/d default
  double lambda = 0.0;  // <= 0 means the 1e-4 * n default

  enum class Solver { GaussSeidel, AccelGaussSeidel, ConjugateGradient };
  Solver solver = Solver::AccelGaussSeidel;
  SketchSampler::Mode sampler_mode = SketchSampler::Mode::UniformRandom;
  Index block_size = 0;
  long iters = 1000;
  std::uint64_t seed = 0;
  double threshold = -1.0;  // early stop on rel_err

  /// Constants for the accelerated solver; Monte-Carlo estimated when absent.
  std::optional<AccelConstants> constants;
  long mc_samples = 2000;
};

struct KrrResult {
  Vector alpha;
  ConvergenceTrace trace;
  double final_rel_err = 0.0;
  double mu_used = 0.0;
  double nu_used = 0.0;
};

/// Solves (K + lambda I) alpha = Y with the configured solver; the ground
/// truth for the error trace comes from a direct factorization. Dense
/// assembly is guarded at n <= 4096.
KrrResult krr_solve(const Dataset& data, const KrrConfig& cfg);

}  // namespace bgs
