// Command-line harness: matrix generation, constant estimation, solver runs
// and the experiment reproductions, all emitting CSV under --out.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "bgs/constants.hpp"
#include "bgs/harness.hpp"
#include "bgs/krr.hpp"
#include "bgs/matrices.hpp"
#include "bgs/solvers.hpp"

namespace {

using namespace bgs;

struct SystemOptions {
  std::string matrix_file;
  std::string kind = "alpha_beta";
  long n = 16;
  double alpha = 1.0;
  double beta = 0.0;
  double kappa_max = 10.0;
  long m = 0;
  double delta = 0.1;
  std::uint64_t seed = 0;
  std::uint64_t rhs_seed = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--matrix", matrix_file, "Read the system matrix from a spdmat file");
    cmd->add_option("--kind", kind,
                    "Ensemble kind: alpha_beta|linspace|wishart|sobolev|circulant|tridiagonal");
    cmd->add_option("--n", n, "Dimension");
    cmd->add_option("--alpha", alpha, "alpha_beta: diagonal shift");
    cmd->add_option("--beta", beta, "alpha_beta: rank-one weight");
    cmd->add_option("--kappa-max", kappa_max, "linspace: largest eigenvalue");
    cmd->add_option("--m", m, "wishart: Gaussian factor rows");
    cmd->add_option("--delta", delta, "tridiagonal: minimum eigenvalue");
    cmd->add_option("--matrix-seed", seed, "Ensemble seed");
    cmd->add_option("--rhs-seed", rhs_seed, "Right-hand-side seed");
  }

  EnsembleSpec ensemble() const {
    EnsembleSpec spec;
    spec.n = n;
    spec.alpha = alpha;
    spec.beta = beta;
    spec.kappa_max = kappa_max;
    spec.m = m > 0 ? m : n + 2;
    spec.delta = delta;
    spec.seed = seed;
    if (kind == "alpha_beta") spec.kind = EnsembleSpec::Kind::AlphaBeta;
    else if (kind == "linspace") spec.kind = EnsembleSpec::Kind::LinspaceEig;
    else if (kind == "wishart") spec.kind = EnsembleSpec::Kind::Wishart;
    else if (kind == "sobolev") spec.kind = EnsembleSpec::Kind::Sobolev;
    else if (kind == "circulant") spec.kind = EnsembleSpec::Kind::Circulant;
    else if (kind == "tridiagonal") spec.kind = EnsembleSpec::Kind::Tridiagonal;
    else throw ConstraintError("unknown ensemble kind '" + kind + "'");
    return spec;
  }

  SpdMatrix build_matrix() const {
    if (!matrix_file.empty()) return read_matrix(matrix_file);
    return generate_ensemble(ensemble());
  }

  LinearSystem build_sys() const {
    SpdMatrix a = build_matrix();
    Vector b = gaussian_rhs(a.n(), rhs_seed);
    return make_system(std::move(a), std::move(b));
  }

  std::optional<EnsembleSpec> ensemble_or_none() const {
    if (!matrix_file.empty()) return std::nullopt;
    return ensemble();
  }
};

SketchSampler make_sampler(const std::string& mode, Index n, Index p) {
  if (mode == "fixed") return SketchSampler::fixed_partition(n, p);
  if (mode == "random") return SketchSampler::uniform_random(n, p);
  throw ConstraintError("unknown sampler mode '" + mode + "' (use fixed|random)");
}

std::string out_path(const std::string& dir, const std::string& file) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / file).string();
}

int run(int argc, char** argv) {
  CLI::App app{"Randomized block Gauss-Seidel solvers and experiments"};
  app.require_subcommand(1);

  std::string out_dir = ".";
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();

  // generate
  auto* generate = app.add_subcommand("generate", "Generate an ensemble matrix file");
  SystemOptions gen_sys;
  gen_sys.attach(generate);
  std::string gen_file = "matrix.spdmat";
  generate->add_option("--file", gen_file, "Output file name");

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Estimate mu/nu for a sampler");
  SystemOptions est_sys;
  est_sys.attach(estimate);
  std::string est_sampler = "random";
  long est_p = 2;
  long est_mc_samples = 0;
  std::uint64_t est_seed = 0;
  std::string est_report;
  estimate->add_option("--sampler", est_sampler, "fixed|random");
  estimate->add_option("--p", est_p, "Block size");
  estimate->add_option("--mc-samples", est_mc_samples,
                       "Use Monte Carlo with this many samples (0 = exact enumeration)");
  estimate->add_option("--seed", est_seed, "Monte Carlo seed");
  estimate->add_option("--report", est_report, "Also write the key=value block to this file");

  // solve
  auto* solve = app.add_subcommand("solve", "Run one solver and write its trace");
  SystemOptions sol_sys;
  sol_sys.attach(solve);
  std::string sol_method = "gauss_seidel";
  std::string sol_sampler = "random";
  long sol_p = 2;
  long sol_iters = 100;
  std::uint64_t sol_seed = 0;
  double sol_threshold = -1.0;
  std::string sol_constants = "exact";
  double sol_mu = 0.0;
  double sol_nu = 0.0;
  long sol_mc_samples = 5000;
  std::string sol_trace = "trace.csv";
  solve->add_option("--solver", sol_method,
                    "gauss_seidel|accel_gauss_seidel|accel_cd|acdm|cg");
  solve->add_option("--sampler", sol_sampler, "fixed|random");
  solve->add_option("--p", sol_p, "Block size");
  solve->add_option("--iters", sol_iters, "Iteration budget");
  solve->add_option("--seed", sol_seed, "Sampling seed");
  solve->add_option("--threshold", sol_threshold, "Stop once rel_err falls below this");
  solve->add_option("--constants", sol_constants, "closed_form|exact|monte_carlo|explicit");
  solve->add_option("--mu", sol_mu, "Explicit mu");
  solve->add_option("--nu", sol_nu, "Explicit nu");
  solve->add_option("--mc-samples", sol_mc_samples, "Monte Carlo constants sample count");
  solve->add_option("--trace-out", sol_trace, "Trace CSV file name");

  // bench
  auto* bench = app.add_subcommand("bench", "Run a config-driven experiment");
  std::string bench_config;
  bench->add_option("--config", bench_config, "Experiment config file")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Block-size sweep");
  SystemOptions sweep_sys;
  sweep_sys.attach(sweep);
  std::string sweep_method = "accel_gauss_seidel";
  std::string sweep_sampler = "random";
  std::string sweep_plist = "2,4,8";
  long sweep_iters = 2000;
  std::string sweep_seeds = "0";
  double sweep_threshold = 1e-4;
  std::string sweep_constants = "exact";
  sweep->add_option("--solver", sweep_method, "Solver method");
  sweep->add_option("--sampler", sweep_sampler, "fixed|random");
  sweep->add_option("--p-list", sweep_plist, "Comma-separated block sizes");
  sweep->add_option("--iters", sweep_iters, "Iteration budget");
  sweep->add_option("--seeds", sweep_seeds, "Comma-separated seeds");
  sweep->add_option("--threshold", sweep_threshold, "Target rel_err");
  sweep->add_option("--constants", sweep_constants, "Constants source for accelerated runs");

  // krr
  auto* krr = app.add_subcommand("krr", "Kernel ridge regression pipeline");
  std::string krr_data;
  std::string krr_blobs;
  double krr_gamma = 0.0;
  double krr_lambda = 0.0;
  std::string krr_solver = "accel_gauss_seidel";
  std::string krr_sampler = "random";
  long krr_block = 50;
  long krr_iters = 2000;
  std::uint64_t krr_seed = 0;
  double krr_threshold = -1.0;
  std::string krr_trace = "krr_trace.csv";
  krr->add_option("--data", krr_data, "Dataset CSV (features..., target)");
  krr->add_option("--blobs", krr_blobs, "Synthetic blobs 'n,d,seed'");
  krr->add_option("--gamma", krr_gamma, "Kernel bandwidth (default 1/d)");
  krr->add_option("--lambda", krr_lambda, "Ridge (default 1e-4 * n)");
  krr->add_option("--solver", krr_solver, "gauss_seidel|accel_gauss_seidel|cg");
  krr->add_option("--sampler", krr_sampler, "fixed|random");
  krr->add_option("--block-size", krr_block, "Block size");
  krr->add_option("--iters", krr_iters, "Iteration budget");
  krr->add_option("--seed", krr_seed, "Sampling seed");
  krr->add_option("--threshold", krr_threshold, "Stop once rel_err falls below this");
  krr->add_option("--trace-out", krr_trace, "Trace CSV file name");

  // constants-report
  auto* report = app.add_subcommand("constants-report", "mu/nu table over the ensembles");
  long rep_n = 16;
  std::string rep_plist = "2,4";
  std::string rep_file = "constants.csv";
  report->add_option("--n", rep_n, "Ensemble dimension");
  report->add_option("--p-list", rep_plist, "Comma-separated block sizes");
  report->add_option("--file", rep_file, "Output CSV name");

  // tune
  auto* tune = app.add_subcommand("tune", "Grid-search mu/nu by pilot runs");
  SystemOptions tune_sys;
  tune_sys.attach(tune);
  std::string tune_sampler = "random";
  long tune_p = 2;
  std::string tune_mu_grid;
  std::string tune_nu_grid;
  long tune_pilot = 200;
  double tune_threshold = 1e-4;
  std::uint64_t tune_seed = 0;
  tune->add_option("--sampler", tune_sampler, "fixed|random");
  tune->add_option("--p", tune_p, "Block size");
  tune->add_option("--mu-grid", tune_mu_grid, "Comma-separated mu values")->required();
  tune->add_option("--nu-grid", tune_nu_grid, "Comma-separated nu values")->required();
  tune->add_option("--pilot-iters", tune_pilot, "Pilot iteration budget");
  tune->add_option("--threshold", tune_threshold, "Pilot target rel_err");
  tune->add_option("--seed", tune_seed, "Pilot seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const auto parse_list = [](const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
  };

  if (generate->parsed()) {
    const SpdMatrix a = gen_sys.build_matrix();
    const std::string path = out_path(out_dir, gen_file);
    write_matrix(path, a);
    std::cout << "wrote " << path << " (n=" << a.n() << ", lambda_min=" << a.lambda_min()
              << ", lambda_max=" << a.lambda_max() << ")\n";
    return 0;
  }

  if (estimate->parsed()) {
    const SpdMatrix a = est_sys.build_matrix();
    const SketchSampler sampler = make_sampler(est_sampler, a.n(), est_p);
    const ConstantsReport rep = est_mc_samples > 0
                                    ? estimate_mu_nu_mc(a, sampler, est_mc_samples, est_seed)
                                    : exact_constants(a, sampler);
    std::string block;
    for (const auto& line : rep.to_key_values()) block += line + "\n";
    std::cout << block;
    if (!est_report.empty()) {
      std::ofstream out(out_path(out_dir, est_report));
      out << block;
    }
    return 0;
  }

  if (solve->parsed()) {
    const LinearSystem sys = sol_sys.build_sys();
    SamplerSpec sampler_spec;
    sampler_spec.name = sol_sampler;
    sampler_spec.mode = sol_sampler == "fixed" ? SketchSampler::Mode::FixedPartition
                                               : SketchSampler::Mode::UniformRandom;
    sampler_spec.p = sol_p;
    SolverSpec solver_spec;
    solver_spec.name = sol_method;
    solver_spec.method = sol_method;
    solver_spec.mu = sol_mu;
    solver_spec.nu = sol_nu;
    solver_spec.mc_samples = sol_mc_samples;
    if (sol_constants == "closed_form") solver_spec.constants = ConstantsSource::ClosedForm;
    else if (sol_constants == "exact") solver_spec.constants = ConstantsSource::Exact;
    else if (sol_constants == "monte_carlo") solver_spec.constants = ConstantsSource::MonteCarlo;
    else if (sol_constants == "explicit") solver_spec.constants = ConstantsSource::Explicit;
    else throw ConstraintError("unknown constants source '" + sol_constants + "'");

    SolveOptions opts;
    opts.iters = sol_iters;
    opts.seed = sol_seed;
    opts.stop_rel_err = sol_threshold;
    const ConvergenceTrace trace =
        run_solver_spec(sys, sampler_spec, solver_spec, sol_sys.ensemble_or_none(), opts);
    const std::string path = out_path(out_dir, sol_trace);
    trace.write_csv_file(path, {"solver=" + sol_method, "sampler=" + sol_sampler,
                                "seed=" + std::to_string(sol_seed)});
    std::cout << "wrote " << path << " (iters=" << trace.rows.back().iter
              << ", rel_err=" << trace.final_rel_err() << ")\n";
    return 0;
  }

  if (bench->parsed()) {
    ExperimentConfig cfg = parse_experiment_config(bench_config);
    if (out_dir != ".") cfg.output_dir = out_dir;
    const SummaryTable table = run_experiment(cfg);
    std::cout << "wrote " << cfg.output_dir << "/summary.csv (" << table.cells.size()
              << " cells)\n";
    return 0;
  }

  if (sweep->parsed()) {
    ExperimentConfig cfg;
    cfg.ensemble = sweep_sys.ensemble_or_none();
    cfg.matrix_path = sweep_sys.matrix_file;
    cfg.rhs_seed = sweep_sys.rhs_seed;
    SamplerSpec sampler_spec;
    sampler_spec.name = sweep_sampler;
    sampler_spec.mode = sweep_sampler == "fixed" ? SketchSampler::Mode::FixedPartition
                                                 : SketchSampler::Mode::UniformRandom;
    cfg.samplers = {sampler_spec};
    SolverSpec solver_spec;
    solver_spec.name = sweep_method;
    solver_spec.method = sweep_method;
    if (sweep_constants == "closed_form") solver_spec.constants = ConstantsSource::ClosedForm;
    else if (sweep_constants == "monte_carlo") solver_spec.constants = ConstantsSource::MonteCarlo;
    cfg.solvers = {solver_spec};
    cfg.iters = sweep_iters;
    for (const double s : parse_list(sweep_seeds))
      cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    cfg.thresholds = {sweep_threshold};
    cfg.output_dir = out_dir;
    std::vector<Index> p_list;
    for (const double p : parse_list(sweep_plist)) p_list.push_back(static_cast<Index>(p));
    block_size_sweep(cfg, p_list);
    std::cout << "wrote " << out_dir << "/sweep_summary.csv\n";
    return 0;
  }

  if (krr->parsed()) {
    Dataset data;
    if (!krr_data.empty()) {
      data = load_dataset_csv(krr_data);
    } else if (!krr_blobs.empty()) {
      const auto parts = parse_list(krr_blobs);
      if (parts.size() < 2) throw ConstraintError("--blobs expects 'n,d[,seed]'");
      data = make_blobs(static_cast<Index>(parts[0]), static_cast<Index>(parts[1]),
                        parts.size() > 2 ? static_cast<std::uint64_t>(parts[2]) : 0);
    } else {
      throw ConstraintError("krr: provide --data or --blobs");
    }
    KrrConfig cfg;
    cfg.gamma = krr_gamma;
    cfg.lambda = krr_lambda;
    cfg.sampler_mode = krr_sampler == "fixed" ? SketchSampler::Mode::FixedPartition
                                              : SketchSampler::Mode::UniformRandom;
    cfg.block_size = krr_block;
    cfg.iters = krr_iters;
    cfg.seed = krr_seed;
    cfg.threshold = krr_threshold;
    if (krr_solver == "gauss_seidel") cfg.solver = KrrConfig::Solver::GaussSeidel;
    else if (krr_solver == "accel_gauss_seidel") cfg.solver = KrrConfig::Solver::AccelGaussSeidel;
    else if (krr_solver == "cg") cfg.solver = KrrConfig::Solver::ConjugateGradient;
    else throw ConstraintError("unknown krr solver '" + krr_solver + "'");

    const KrrResult result = krr_solve(data, cfg);
    const std::string path = out_path(out_dir, krr_trace);
    result.trace.write_csv_file(
        path, {"solver=" + krr_solver, "sampler=" + krr_sampler,
               "n=" + std::to_string(data.n()), "mu=" + std::to_string(result.mu_used),
               "nu=" + std::to_string(result.nu_used)});
    std::cout << "wrote " << path << " (n=" << data.n()
              << ", final_rel_err=" << result.final_rel_err << ")\n";
    return 0;
  }

  if (report->parsed()) {
    std::vector<Index> p_list;
    for (const double p : parse_list(rep_plist)) p_list.push_back(static_cast<Index>(p));
    const auto rows = constants_report(five_ensembles_16(rep_n), p_list);
    const std::string path = out_path(out_dir, rep_file);
    write_constants_report_csv(path, rows);
    std::cout << "wrote " << path << " (" << rows.size() << " rows)\n";
    return 0;
  }

  if (tune->parsed()) {
    const LinearSystem sys = tune_sys.build_sys();
    const SketchSampler sampler = make_sampler(tune_sampler, sys.a.n(), tune_p);
    TuneGrid grid;
    grid.mu_values = parse_list(tune_mu_grid);
    grid.nu_values = parse_list(tune_nu_grid);
    grid.pilot_iters = tune_pilot;
    grid.threshold = tune_threshold;
    const AccelConstants best = tune_constants(sys, sampler, grid, tune_seed);
    std::cout << "mu=" << best.mu << "\nnu=" << best.nu << "\ntau=" << best.tau << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const bgs::ConstraintError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const bgs::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const bgs::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  }
}
