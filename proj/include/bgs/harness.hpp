#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bgs/constants.hpp"
#include "bgs/matrices.hpp"
#include "bgs/sketch.hpp"
#include "bgs/solvers.hpp"
#include "bgs/types.hpp"

namespace bgs {

/// How a solver obtains (mu, nu).
enum class ConstantsSource { ClosedForm, Exact, MonteCarlo, Explicit };

struct SamplerSpec {
  std::string name;
  SketchSampler::Mode mode = SketchSampler::Mode::UniformRandom;
  Index p = 0;
  std::vector<double> weights;  // Weighted mode: weights over the partition blocks

  SketchSampler build(Index n) const;
};

struct SolverSpec {
  std::string name;
  std::string method = "gauss_seidel";  // gauss_seidel | accel_gauss_seidel | accel_cd | acdm | cg
  ConstantsSource constants = ConstantsSource::Exact;
  double mu = 0.0;  // Explicit source
  double nu = 0.0;
  long mc_samples = 5000;
  double cg_tol = 1e-10;
};

struct ExperimentConfig {
  std::optional<EnsembleSpec> ensemble;  // either an ensemble ...
  std::string matrix_path;               // ... or a matrix file
  std::uint64_t rhs_seed = 0;

  std::vector<SamplerSpec> samplers;
  std::vector<SolverSpec> solvers;
  long iters = 100;
  std::vector<std::uint64_t> seeds;
  std::vector<double> thresholds = {1e-1, 1e-2, 1e-4, 1e-6};
  std::string output_dir = ".";

  void validate() const;
  /// FNV-1a hash of the semantic fields (everything except output_dir).
  std::uint64_t semantic_hash() const;
};

/// Flat sectioned key=value config file (grammar documented in the README).
ExperimentConfig parse_experiment_config(const std::string& path);

struct SummaryCell {
  std::string solver;
  std::string sampler;
  double threshold = 0.0;
  double mean_iters = 0.0;   // -1 when some seed never reached the threshold
  double std_iters = 0.0;
  double mean_seconds = 0.0;
  long reached = 0;  // seeds that reached the threshold
  long seeds = 0;
};

struct SummaryTable {
  std::vector<double> thresholds;
  std::vector<SummaryCell> cells;

  void write_csv(const std::string& path) const;
};

/// Runs every (solver, sampler, seed) cell, writes one trace CSV per cell plus
/// a summary CSV, and returns the summary.
SummaryTable run_experiment(const ExperimentConfig& cfg);

/// Builds the system named by the config (ensemble or file) with its rhs.
LinearSystem build_system(const ExperimentConfig& cfg);

/// Resolves (mu, nu) for a solver/sampler pair per the requested source.
AccelConstants resolve_constants(const LinearSystem& sys, const SketchSampler& sampler,
                                 const SolverSpec& solver,
                                 const std::optional<EnsembleSpec>& ensemble,
                                 std::uint64_t seed);

/// Dispatches one solver run.
ConvergenceTrace run_solver_spec(const LinearSystem& sys, const SamplerSpec& sampler_spec,
                                 const SolverSpec& solver_spec,
                                 const std::optional<EnsembleSpec>& ensemble,
                                 const SolveOptions& opts);

/// Iterations- and time-to-threshold as the block size varies.
SummaryTable block_size_sweep(const ExperimentConfig& cfg, const std::vector<Index>& p_list);

struct ConstantsRow {
  std::string ensemble;
  Index p = 0;
  double mu = 0.0;
  double nu = 0.0;
  double nu_lower = 0.0;
  double nu_upper = 0.0;
  double tightness = 0.0;  // nu_upper / nu
};

/// mu/nu table over the named ensembles (see five_ensembles_16) and block
/// sizes; asserts the sandwich n/p <= nu <= bound and nu <= 1/mu.
std::vector<ConstantsRow> constants_report(const std::vector<EnsembleSpec>& ensembles,
                                           const std::vector<Index>& p_list);
void write_constants_report_csv(const std::string& path, const std::vector<ConstantsRow>& rows);

/// The five 16 x 16 ensembles used in the experiments.
std::vector<EnsembleSpec> five_ensembles_16(Index n = 16);

struct TuneGrid {
  std::vector<double> mu_values;
  std::vector<double> nu_values;
  long pilot_iters = 200;
  double threshold = 1e-4;
};

/// Grid-searches (mu, nu) with short pilot runs of accelerated Gauss-Seidel
/// and returns the pair minimizing iterations-to-threshold (final error
/// breaks ties). Throws when the grid is empty or every pilot diverges.
AccelConstants tune_constants(const LinearSystem& sys, const SketchSampler& sampler,
                              const TuneGrid& grid, std::uint64_t seed);

}  // namespace bgs
