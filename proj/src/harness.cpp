#include "bgs/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace bgs {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

EnsembleSpec::Kind kind_from_string(const std::string& s, const std::string& where) {
  if (s == "alpha_beta") return EnsembleSpec::Kind::AlphaBeta;
  if (s == "linspace") return EnsembleSpec::Kind::LinspaceEig;
  if (s == "wishart") return EnsembleSpec::Kind::Wishart;
  if (s == "sobolev") return EnsembleSpec::Kind::Sobolev;
  if (s == "circulant") return EnsembleSpec::Kind::Circulant;
  if (s == "tridiagonal") return EnsembleSpec::Kind::Tridiagonal;
  throw ParseError(where + ": unknown ensemble kind '" + s + "'");
}

ConstantsSource constants_from_string(const std::string& s, const std::string& where) {
  if (s == "closed_form") return ConstantsSource::ClosedForm;
  if (s == "exact") return ConstantsSource::Exact;
  if (s == "monte_carlo") return ConstantsSource::MonteCarlo;
  if (s == "explicit") return ConstantsSource::Explicit;
  throw ParseError(where + ": unknown constants source '" + s + "'");
}

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  h ^= 0xff;
  h *= kFnvPrime;
}

}  // namespace

SketchSampler SamplerSpec::build(Index n) const {
  switch (mode) {
    case SketchSampler::Mode::FixedPartition:
      return SketchSampler::fixed_partition(n, p);
    case SketchSampler::Mode::UniformRandom:
      return SketchSampler::uniform_random(n, p);
    case SketchSampler::Mode::Weighted: {
      // Weighted mode reweights the contiguous partition blocks.
      const SketchSampler base = SketchSampler::fixed_partition(n, p);
      if (weights.size() != base.blocks().size())
        throw ConstraintError("sampler '" + name + "': weighted mode needs " +
                              std::to_string(base.blocks().size()) + " weights");
      double sum = 0.0;
      for (double w : weights) sum += w;
      std::vector<double> probs;
      probs.reserve(weights.size());
      for (double w : weights) probs.push_back(w / sum);
      return SketchSampler::weighted(n, base.blocks(), probs);
    }
  }
  throw ConstraintError("sampler '" + name + "': unknown mode");
}

void ExperimentConfig::validate() const {
  if (!ensemble && matrix_path.empty())
    throw ConstraintError("experiment config: a system (ensemble or matrix file) is required");
  if (ensemble) ensemble->validate();
  if (!matrix_path.empty() && !std::filesystem::exists(matrix_path))
    throw ConstraintError("experiment config: matrix file does not exist: " + matrix_path);
  if (samplers.empty()) throw ConstraintError("experiment config: at least one sampler required");
  if (solvers.empty()) throw ConstraintError("experiment config: at least one solver required");
  if (seeds.empty()) throw ConstraintError("experiment config: at least one seed required");
  if (iters < 0) throw ConstraintError("experiment config: iters >= 0 required");
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] < thresholds[i - 1]))
      throw ConstraintError("experiment config: thresholds must be strictly decreasing");
  }
}

std::uint64_t ExperimentConfig::semantic_hash() const {
  std::uint64_t h = kFnvOffset;
  fnv_mix(h, ensemble ? ensemble->describe() : "file:" + matrix_path);
  fnv_mix(h, std::to_string(rhs_seed));
  for (const auto& s : samplers) {
    fnv_mix(h, s.name);
    fnv_mix(h, std::to_string(static_cast<int>(s.mode)));
    fnv_mix(h, std::to_string(s.p));
    for (double w : s.weights) fnv_mix(h, fmt_double(w));
  }
  for (const auto& s : solvers) {
    fnv_mix(h, s.name);
    fnv_mix(h, s.method);
    fnv_mix(h, std::to_string(static_cast<int>(s.constants)));
    fnv_mix(h, fmt_double(s.mu));
    fnv_mix(h, fmt_double(s.nu));
    fnv_mix(h, std::to_string(s.mc_samples));
    fnv_mix(h, fmt_double(s.cg_tol));
  }
  fnv_mix(h, std::to_string(iters));
  for (auto s : seeds) fnv_mix(h, std::to_string(s));
  for (double t : thresholds) fnv_mix(h, fmt_double(t));
  return h;
}

ExperimentConfig parse_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open " + path);

  ExperimentConfig cfg;
  std::string line;
  std::string section;
  std::string section_name;
  long line_no = 0;

  EnsembleSpec ens;
  bool have_system = false;
  bool system_is_file = false;

  auto current_sampler = [&]() -> SamplerSpec& {
    for (auto& s : cfg.samplers)
      if (s.name == section_name) return s;
    cfg.samplers.push_back(SamplerSpec{});
    cfg.samplers.back().name = section_name;
    return cfg.samplers.back();
  };
  auto current_solver = [&]() -> SolverSpec& {
    for (auto& s : cfg.solvers)
      if (s.name == section_name) return s;
    cfg.solvers.push_back(SolverSpec{});
    cfg.solvers.back().name = section_name;
    return cfg.solvers.back();
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(where + ": unterminated section header");
      const auto tokens = split_ws(line.substr(1, line.size() - 2));
      if (tokens.empty()) throw ParseError(where + ": empty section header");
      section = tokens[0];
      section_name = tokens.size() > 1 ? tokens[1] : tokens[0];
      if (section != "system" && section != "sampler" && section != "solver" && section != "run")
        throw ParseError(where + ": unknown section '" + section + "'");
      if (section == "sampler") current_sampler();
      if (section == "solver") current_solver();
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ParseError(where + ": empty key or value");

    try {
      if (section == "system") {
        have_system = true;
        if (key == "kind") {
          if (value == "file") {
            system_is_file = true;
          } else {
            ens.kind = kind_from_string(value, where);
          }
        } else if (key == "path") {
          system_is_file = true;
          cfg.matrix_path = value;
        } else if (key == "n") {
          ens.n = std::stol(value);
        } else if (key == "alpha") {
          ens.alpha = std::stod(value);
        } else if (key == "beta") {
          ens.beta = std::stod(value);
        } else if (key == "kappa_max") {
          ens.kappa_max = std::stod(value);
        } else if (key == "m") {
          ens.m = std::stol(value);
        } else if (key == "delta") {
          ens.delta = std::stod(value);
        } else if (key == "seed") {
          ens.seed = std::stoull(value);
        } else if (key == "rhs_seed") {
          cfg.rhs_seed = std::stoull(value);
        } else {
          throw ParseError(where + ": unknown system key '" + key + "'");
        }
      } else if (section == "sampler") {
        SamplerSpec& s = current_sampler();
        if (key == "mode") {
          if (value == "fixed") s.mode = SketchSampler::Mode::FixedPartition;
          else if (value == "random") s.mode = SketchSampler::Mode::UniformRandom;
          else if (value == "weighted") s.mode = SketchSampler::Mode::Weighted;
          else throw ParseError(where + ": unknown sampler mode '" + value + "'");
        } else if (key == "p") {
          s.p = std::stol(value);
        } else if (key == "weights") {
          s.weights.clear();
          for (const auto& tok : split_ws(value)) s.weights.push_back(std::stod(tok));
        } else {
          throw ParseError(where + ": unknown sampler key '" + key + "'");
        }
      } else if (section == "solver") {
        SolverSpec& s = current_solver();
        if (key == "method") s.method = value;
        else if (key == "constants") s.constants = constants_from_string(value, where);
        else if (key == "mu") s.mu = std::stod(value);
        else if (key == "nu") s.nu = std::stod(value);
        else if (key == "mc_samples") s.mc_samples = std::stol(value);
        else if (key == "cg_tol") s.cg_tol = std::stod(value);
        else throw ParseError(where + ": unknown solver key '" + key + "'");
      } else if (section == "run") {
        if (key == "iters") cfg.iters = std::stol(value);
        else if (key == "seeds") {
          cfg.seeds.clear();
          for (const auto& tok : split_ws(value)) cfg.seeds.push_back(std::stoull(tok));
        } else if (key == "thresholds") {
          cfg.thresholds.clear();
          for (const auto& tok : split_ws(value)) cfg.thresholds.push_back(std::stod(tok));
        } else if (key == "out") {
          cfg.output_dir = value;
        } else {
          throw ParseError(where + ": unknown run key '" + key + "'");
        }
      } else {
        throw ParseError(where + ": key outside any section");
      }
    } catch (const std::invalid_argument&) {
      throw ParseError(where + ": malformed number '" + value + "'");
    } catch (const std::out_of_range&) {
      throw ParseError(where + ": number out of range '" + value + "'");
    }
  }
  if (have_system && !system_is_file) cfg.ensemble = ens;
  cfg.validate();
  return cfg;
}

LinearSystem build_system(const ExperimentConfig& cfg) {
  SpdMatrix a = cfg.ensemble ? generate_ensemble(*cfg.ensemble) : read_matrix(cfg.matrix_path);
  Vector b = gaussian_rhs(a.n(), cfg.rhs_seed);
  return make_system(std::move(a), std::move(b));
}

AccelConstants resolve_constants(const LinearSystem& sys, const SketchSampler& sampler,
                                 const SolverSpec& solver,
                                 const std::optional<EnsembleSpec>& ensemble,
                                 std::uint64_t seed) {
  switch (solver.constants) {
    case ConstantsSource::Explicit:
      return AccelConstants::from_mu_nu(solver.mu, solver.nu);
    case ConstantsSource::ClosedForm: {
      if (!ensemble || ensemble->kind != EnsembleSpec::Kind::AlphaBeta)
        throw ConstraintError("closed_form constants require an alpha_beta system");
      const double mu = closed_form_mu(sys.a.n(), sampler.p(), ensemble->alpha, ensemble->beta,
                                       sampler.mode());
      double nu;
      if (sampler.mode() == SketchSampler::Mode::FixedPartition) {
        nu = static_cast<double>(sys.a.n()) / static_cast<double>(sampler.p());
      } else if (sampler.mode() == SketchSampler::Mode::UniformRandom) {
        nu = closed_form_nu_uniform(sys.a.n(), sampler.p(), ensemble->alpha, ensemble->beta);
      } else {
        throw ConstraintError("closed_form constants: unsupported sampler mode");
      }
      return AccelConstants::from_mu_nu(mu, std::min(nu, 1.0 / mu));
    }
    case ConstantsSource::Exact: {
      const ConstantsReport rep = exact_constants(sys.a, sampler);
      return AccelConstants::from_mu_nu(rep.mu, std::min(rep.nu, 1.0 / rep.mu));
    }
    case ConstantsSource::MonteCarlo: {
      const ConstantsReport rep = estimate_mu_nu_mc(sys.a, sampler, solver.mc_samples, seed);
      const double nu = std::max(1.0, std::min(rep.nu, 1.0 / rep.mu));
      return AccelConstants::from_mu_nu(rep.mu, nu);
    }
  }
  throw ConstraintError("resolve_constants: unknown source");
}

ConvergenceTrace run_solver_spec(const LinearSystem& sys, const SamplerSpec& sampler_spec,
                                 const SolverSpec& solver_spec,
                                 const std::optional<EnsembleSpec>& ensemble,
                                 const SolveOptions& opts) {
  const Vector x0 = Vector::Zero(sys.a.n());
  const SketchSampler sampler = sampler_spec.build(sys.a.n());
  if (solver_spec.method == "gauss_seidel") {
    return gauss_seidel(sys, sampler, x0, opts);
  }
  if (solver_spec.method == "accel_gauss_seidel") {
    const AccelConstants consts = resolve_constants(sys, sampler, solver_spec, ensemble, opts.seed);
    return accel_gauss_seidel(sys, sampler, x0, consts, opts);
  }
  if (solver_spec.method == "accel_cd" || solver_spec.method == "acdm") {
    if (sampler.mode() == SketchSampler::Mode::UniformRandom)
      throw ConstraintError(solver_spec.method + " requires a fixed partition sampler");
    if (solver_spec.method == "accel_cd")
      return accel_coordinate_descent(sys, sampler.blocks(), x0, opts);
    return acdm(sys, sampler.blocks(), x0, opts);
  }
  if (solver_spec.method == "cg") {
    return conjugate_gradient(sys, x0, solver_spec.cg_tol, std::max(1L, opts.iters));
  }
  throw ConstraintError("unknown solver method '" + solver_spec.method + "'");
}

void SummaryTable::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConstraintError("SummaryTable: cannot open " + path);
  out << "solver,sampler,threshold,mean_iters,std_iters,mean_seconds,reached,seeds\n";
  for (const auto& c : cells) {
    out << c.solver << ',' << c.sampler << ',' << fmt_double(c.threshold) << ','
        << fmt_double(c.mean_iters) << ',' << fmt_double(c.std_iters) << ','
        << fmt_double(c.mean_seconds) << ',' << c.reached << ',' << c.seeds << "\n";
  }
}

namespace {

void summarize_cell(SummaryTable& table, const std::string& solver, const std::string& sampler,
                    double threshold, const std::vector<const ConvergenceTrace*>& traces) {
  SummaryCell cell;
  cell.solver = solver;
  cell.sampler = sampler;
  cell.threshold = threshold;
  cell.seeds = static_cast<long>(traces.size());
  std::vector<double> iters_to;
  double seconds_sum = 0.0;
  for (const auto* t : traces) {
    const long k = t->iterations_to(threshold);
    if (k >= 0) {
      iters_to.push_back(static_cast<double>(k));
      seconds_sum += t->rows[static_cast<std::size_t>(k)].seconds;
    }
  }
  cell.reached = static_cast<long>(iters_to.size());
  if (iters_to.empty()) {
    cell.mean_iters = -1.0;
    cell.std_iters = 0.0;
    cell.mean_seconds = -1.0;
  } else {
    double mean = 0.0;
    for (double v : iters_to) mean += v;
    mean /= static_cast<double>(iters_to.size());
    double var = 0.0;
    for (double v : iters_to) var += (v - mean) * (v - mean);
    var /= static_cast<double>(iters_to.size());
    cell.mean_iters = mean;
    cell.std_iters = std::sqrt(var);
    cell.mean_seconds = seconds_sum / static_cast<double>(iters_to.size());
  }
  table.cells.push_back(cell);
}

}  // namespace

SummaryTable run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.output_dir);
  const LinearSystem sys = build_system(cfg);

  char hash_buf[32];
  std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                static_cast<unsigned long long>(cfg.semantic_hash()));
  const std::string hash_str = hash_buf;

  SummaryTable table;
  table.thresholds = cfg.thresholds;
  const double stop = cfg.thresholds.empty() ? -1.0 : cfg.thresholds.back();

  for (const auto& solver : cfg.solvers) {
    for (const auto& sampler : cfg.samplers) {
      std::vector<ConvergenceTrace> traces;
      traces.reserve(cfg.seeds.size());
      for (const std::uint64_t seed : cfg.seeds) {
        SolveOptions opts;
        opts.iters = cfg.iters;
        opts.seed = seed;
        opts.stop_rel_err = stop;
        ConvergenceTrace trace = run_solver_spec(sys, sampler, solver, cfg.ensemble, opts);

        std::vector<std::string> meta;
        meta.push_back("config_hash=" + hash_str);
        meta.push_back("system=" + (cfg.ensemble ? cfg.ensemble->describe()
                                                 : "file:" + cfg.matrix_path));
        meta.push_back("solver=" + solver.name + " method=" + solver.method);
        meta.push_back("sampler=" + sampler.name);
        meta.push_back("seed=" + std::to_string(seed));
        if (solver.method == "accel_gauss_seidel") {
          const AccelConstants consts =
              resolve_constants(sys, sampler.build(sys.a.n()), solver, cfg.ensemble, seed);
          meta.push_back("mu=" + fmt_double(consts.mu));
          meta.push_back("nu=" + fmt_double(consts.nu));
          meta.push_back("tau=" + fmt_double(consts.tau));
        }
        const std::string file = cfg.output_dir + "/trace_" + solver.name + "_" + sampler.name +
                                 "_seed" + std::to_string(seed) + ".csv";
        trace.write_csv_file(file, meta);
        traces.push_back(std::move(trace));
      }
      std::vector<const ConvergenceTrace*> ptrs;
      for (const auto& t : traces) ptrs.push_back(&t);
      for (const double threshold : cfg.thresholds)
        summarize_cell(table, solver.name, sampler.name, threshold, ptrs);
    }
  }
  table.write_csv(cfg.output_dir + "/summary.csv");
  return table;
}

SummaryTable block_size_sweep(const ExperimentConfig& cfg, const std::vector<Index>& p_list) {
  cfg.validate();
  if (p_list.empty()) throw ConstraintError("block_size_sweep: empty p list");
  std::filesystem::create_directories(cfg.output_dir);
  const LinearSystem sys = build_system(cfg);
  const SolverSpec& solver = cfg.solvers.front();
  const SamplerSpec& base_sampler = cfg.samplers.front();

  SummaryTable table;
  table.thresholds = cfg.thresholds;
  const double stop = cfg.thresholds.empty() ? -1.0 : cfg.thresholds.back();

  for (const Index p : p_list) {
    SamplerSpec sampler = base_sampler;
    sampler.p = p;
    sampler.name = "p" + std::to_string(p);
    std::vector<ConvergenceTrace> traces;
    for (const std::uint64_t seed : cfg.seeds) {
      SolveOptions opts;
      opts.iters = cfg.iters;
      opts.seed = seed;
      opts.stop_rel_err = stop;
      traces.push_back(run_solver_spec(sys, sampler, solver, cfg.ensemble, opts));
    }
    std::vector<const ConvergenceTrace*> ptrs;
    for (const auto& t : traces) ptrs.push_back(&t);
    for (const double threshold : cfg.thresholds)
      summarize_cell(table, solver.name, sampler.name, threshold, ptrs);
  }
  table.write_csv(cfg.output_dir + "/sweep_summary.csv");
  return table;
}

std::vector<EnsembleSpec> five_ensembles_16(Index n) {
  std::vector<EnsembleSpec> specs(5);
  specs[0].kind = EnsembleSpec::Kind::LinspaceEig;
  specs[0].n = n;
  specs[0].kappa_max = 100.0;
  specs[0].seed = 1;
  specs[1].kind = EnsembleSpec::Kind::Wishart;
  specs[1].n = n;
  specs[1].m = n + 2;
  specs[1].seed = 2;
  specs[2].kind = EnsembleSpec::Kind::Sobolev;
  specs[2].n = n;
  specs[3].kind = EnsembleSpec::Kind::Circulant;
  specs[3].n = n;
  specs[4].kind = EnsembleSpec::Kind::Tridiagonal;
  specs[4].n = n;
  specs[4].delta = 0.1;
  return specs;
}

std::vector<ConstantsRow> constants_report(const std::vector<EnsembleSpec>& ensembles,
                                           const std::vector<Index>& p_list) {
  std::vector<ConstantsRow> rows;
  for (const auto& spec : ensembles) {
    const SpdMatrix a = generate_ensemble(spec);
    for (const Index p : p_list) {
      const SketchSampler sampler = SketchSampler::uniform_random(a.n(), p);
      ConstantsRow row;
      row.ensemble = spec.describe();
      row.p = p;
      const std::size_t count =
          binomial_capped(a.n(), p, SketchSampler::kDefaultSupportBudget);
      if (count <= SketchSampler::kDefaultSupportBudget) {
        const ConstantsReport rep = exact_constants(a, sampler);
        row.mu = rep.mu;
        row.nu = rep.nu;
        row.nu_lower = rep.nu_lower;
        row.nu_upper = rep.nu_upper;
      } else {
        const ConstantsReport rep = estimate_mu_nu_mc(a, sampler, 20000, 0);
        row.mu = rep.mu;
        row.nu = rep.nu;
        row.nu_lower = rep.nu_lower;
        const auto bounds = nu_bounds(a, p, true, 0);
        row.nu_upper = bounds.second;
      }
      row.tightness = row.nu_upper / row.nu;
      if (row.nu < row.nu_lower - tol::exact_path ||
          row.nu > row.nu_upper + tol::exact_path || row.nu > 1.0 / row.mu + tol::exact_path) {
        throw NumericalError("constants_report: nu sandwich violated for " + row.ensemble +
                             " p=" + std::to_string(p));
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_constants_report_csv(const std::string& path, const std::vector<ConstantsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ConstraintError("constants_report: cannot open " + path);
  out << "ensemble,p,mu,nu,nu_lower,nu_upper,tightness\n";
  for (const auto& r : rows) {
    out << r.ensemble << ',' << r.p << ',' << fmt_double(r.mu) << ',' << fmt_double(r.nu) << ','
        << fmt_double(r.nu_lower) << ',' << fmt_double(r.nu_upper) << ','
        << fmt_double(r.tightness) << "\n";
  }
}

AccelConstants tune_constants(const LinearSystem& sys, const SketchSampler& sampler,
                              const TuneGrid& grid, std::uint64_t seed) {
  if (grid.mu_values.empty() || grid.nu_values.empty())
    throw ConstraintError("tune_constants: empty grid");
  const Vector x0 = Vector::Zero(sys.a.n());

  struct Outcome {
    AccelConstants consts;
    long iters_to = -1;
    double final_err = std::numeric_limits<double>::infinity();
  };
  std::optional<Outcome> best;
  bool any_valid = false;

  for (const double mu : grid.mu_values) {
    for (const double nu : grid.nu_values) {
      AccelConstants consts;
      try {
        consts = AccelConstants::from_mu_nu(mu, nu);
      } catch (const ConstraintError&) {
        continue;  // invalid grid point; skip
      }
      SolveOptions opts;
      opts.iters = grid.pilot_iters;
      opts.seed = seed;
      opts.stop_rel_err = grid.threshold;
      const ConvergenceTrace trace = accel_gauss_seidel(sys, sampler, x0, consts, opts);
      Outcome out;
      out.consts = consts;
      out.iters_to = trace.iterations_to(grid.threshold);
      out.final_err = trace.final_rel_err();
      const double initial = trace.rows.front().rel_err;
      const bool diverged = !std::isfinite(out.final_err) || out.final_err > initial;
      if (diverged) continue;
      any_valid = true;
      const auto better = [](const Outcome& a, const Outcome& b) {
        const double ka = a.iters_to < 0 ? std::numeric_limits<double>::infinity()
                                         : static_cast<double>(a.iters_to);
        const double kb = b.iters_to < 0 ? std::numeric_limits<double>::infinity()
                                         : static_cast<double>(b.iters_to);
        if (ka != kb) return ka < kb;
        return a.final_err < b.final_err;
      };
      if (!best || better(out, *best)) best = out;
    }
  }
  if (!any_valid || !best)
    throw NumericalError("tune_constants: all pilot runs diverged");
  return best->consts;
}

}  // namespace bgs
