#include "bgs/krr.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bgs/constants.hpp"
#include "bgs/rng.hpp"

namespace bgs {

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_dataset_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t consumed = 0;
        const double v = std::stod(cell, &consumed);
        while (consumed < cell.size() && std::isspace(static_cast<unsigned char>(cell[consumed])))
          ++consumed;
        if (consumed != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": non-numeric cell '" + cell +
                         "'");
      }
    }
    if (row.size() < 2) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": need at least one feature column and a target");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": ragged row, expected " +
                       std::to_string(rows.front().size()) + " cells");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("load_dataset_csv: no rows in " + path);

  const Index n = static_cast<Index>(rows.size());
  const Index d = static_cast<Index>(rows.front().size()) - 1;
  Dataset data;
  data.x.resize(n, d);
  data.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) data.x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    data.y(i) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
  }
  for (Index i = 0; i < n; ++i) {
    if (!data.y.row(i).allFinite() || !data.x.row(i).allFinite())
      throw ParseError(path + ": non-finite value in row " + std::to_string(i));
  }
  return data;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw ConstraintError("write_dataset_csv: cannot open " + path);
  char buf[32];
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.d(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g,", data.x(i, j));
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g\n", data.y(i));
    out << buf;
  }
}

Dataset make_blobs(Index n, Index d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw ConstraintError("make_blobs: n >= 1 and d >= 1 required");
  Rng rng(seed);
  Dataset data;
  data.x.resize(n, d);
  data.y.resize(n);
  // Cluster centers at +-2 along every axis.
  for (Index i = 0; i < n; ++i) {
    const bool positive = (i % 2) == 0;
    const double center = positive ? 2.0 : -2.0;
    for (Index j = 0; j < d; ++j) data.x(i, j) = center + rng.next_gaussian();
    data.y(i) = positive ? 1.0 : -1.0;
  }
  return data;
}

Matrix gaussian_kernel(const Dataset& data, double gamma) {
  if (!(gamma > 0.0)) throw ConstraintError("gaussian_kernel: gamma > 0 violated");
  for (Index i = 0; i < data.n(); ++i) {
    if (!data.x.row(i).allFinite())
      throw ConstraintError("gaussian_kernel: non-finite feature in row " + std::to_string(i));
  }
  const Vector sq = data.x.rowwise().squaredNorm();
  Matrix dist = sq.replicate(1, data.n()) + sq.transpose().replicate(data.n(), 1) -
                2.0 * (data.x * data.x.transpose());
  dist = dist.cwiseMax(0.0);  // clamp the round-off negatives
  Matrix k = (-gamma * dist).array().exp();
  k = 0.5 * (k + k.transpose());
  k.diagonal().setOnes();
  return k;
}

KrrResult krr_solve(const Dataset& data, const KrrConfig& cfg) {
  const Index n = data.n();
  if (n > 4096) {
    throw ConstraintError("krr_solve: n = " + std::to_string(n) +
                          " exceeds the dense-assembly guard of 4096");
  }
  const double gamma = cfg.gamma > 0.0 ? cfg.gamma : 1.0 / static_cast<double>(data.d());
  const double lambda = cfg.lambda > 0.0 ? cfg.lambda : 1e-4 * static_cast<double>(n);

  Matrix k = gaussian_kernel(data, gamma);
  k.diagonal().array() += lambda;
  SpdMatrix m(std::move(k));
  LinearSystem sys = make_system(std::move(m), data.y);

  SolveOptions opts;
  opts.iters = cfg.iters;
  opts.seed = cfg.seed;
  opts.stop_rel_err = cfg.threshold;

  KrrResult result;
  const Vector x0 = Vector::Zero(n);
  if (cfg.solver == KrrConfig::Solver::ConjugateGradient) {
    const double tol_cg = cfg.threshold > 0.0 ? std::sqrt(cfg.threshold) : 1e-10;
    result.trace = conjugate_gradient(sys, x0, tol_cg, std::max(1L, cfg.iters));
  } else {
    Index p = cfg.block_size;
    if (p < 1 || p > n) throw ConstraintError("krr_solve: block size must lie in [1, n]");
    const SketchSampler sampler = cfg.sampler_mode == SketchSampler::Mode::FixedPartition
                                      ? SketchSampler::fixed_partition(n, p)
                                      : SketchSampler::uniform_random(n, p);
    if (cfg.solver == KrrConfig::Solver::GaussSeidel) {
      result.trace = gauss_seidel(sys, sampler, x0, opts);
    } else {
      AccelConstants consts;
      if (cfg.constants) {
        consts = *cfg.constants;
      } else if (cfg.sampler_mode == SketchSampler::Mode::FixedPartition) {
        // The partition support is tiny, so the exact constants are cheap.
        const ConstantsReport rep = exact_constants(sys.a, sampler);
        consts = AccelConstants::from_mu_nu(rep.mu, std::min(rep.nu, 1.0 / rep.mu));
      } else {
        const ConstantsReport rep = estimate_mu_nu_mc(sys.a, sampler, cfg.mc_samples, cfg.seed);
        consts = AccelConstants::from_mu_nu(rep.mu, std::min(rep.nu, 1.0 / rep.mu));
      }
      result.mu_used = consts.mu;
      result.nu_used = consts.nu;
      result.trace = accel_gauss_seidel(sys, sampler, x0, consts, opts);
    }
  }
  result.final_rel_err = result.trace.final_rel_err();
  result.alpha = result.trace.final_iterate;
  return result;
}

}  // namespace bgs
