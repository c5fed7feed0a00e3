#include "bgs/solvers.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace bgs {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point t0, Clock::time_point t1) {
  return std::chrono::duration<double>(t1 - t0).count();
}

Matrix gather_block(const Matrix& a, const IndexSet& j) {
  const Index p = j.size();
  Matrix sub(p, p);
  for (Index r = 0; r < p; ++r)
    for (Index c = 0; c < p; ++c) sub(r, c) = a(j.idx[r], j.idx[c]);
  return sub;
}

Vector gather_vec(const Vector& v, const IndexSet& j) {
  Vector out(j.size());
  for (Index r = 0; r < j.size(); ++r) out(r) = v(j.idx[r]);
  return out;
}

// Eigendecomposition-backed pseudo-inverse of a symmetric block, with the
// cutoff dim * eps * lambda_max(|A_J|).
struct BlockFactor {
  Matrix vecs;
  Vector inv_vals;

  Vector solve(const Vector& r) const {
    return vecs * (inv_vals.asDiagonal() * (vecs.transpose() * r));
  }
};

BlockFactor factor_block(const Matrix& sub) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sub);
  const Vector& vals = es.eigenvalues();
  const double threshold = static_cast<double>(sub.rows()) *
                           std::numeric_limits<double>::epsilon() *
                           vals.cwiseAbs().maxCoeff();
  BlockFactor f;
  f.vecs = es.eigenvectors();
  f.inv_vals = Vector::Zero(vals.size());
  for (Index i = 0; i < vals.size(); ++i) {
    if (vals(i) > threshold) f.inv_vals(i) = 1.0 / vals(i);
  }
  return f;
}

// Draw-and-solve helper for the Gauss-Seidel family. Stored-block samplers
// get their factorizations cached once; uniform random sampling factorizes
// the drawn sub-block fresh every iteration.
class SubBlockSolver {
 public:
  SubBlockSolver(const SpdMatrix& a, const SketchSampler& sampler)
      : a_(a), sampler_(sampler), cached_(sampler.mode() != SketchSampler::Mode::UniformRandom) {
    if (sampler.n() != a.n())
      throw ConstraintError("sampler dimension does not match the matrix");
    if (cached_) {
      factors_.reserve(sampler.blocks().size());
      for (const auto& b : sampler.blocks()) factors_.push_back(factor_block(gather_block(a.data(), b)));
    }
  }

  const IndexSet& draw(Rng& rng) {
    if (cached_) {
      ord_ = sampler_.sample_ordinal(rng);
      return sampler_.blocks()[ord_];
    }
    current_ = sampler_.sample(rng);
    fresh_ = factor_block(gather_block(a_.data(), current_));
    return current_;
  }

  const IndexSet& drawn() const { return cached_ ? sampler_.blocks()[ord_] : current_; }

  /// w supported on the drawn set with A_J w_J = residual_J.
  Vector solve(const Vector& residual) const {
    const IndexSet& j = drawn();
    const BlockFactor& f = cached_ ? factors_[ord_] : fresh_;
    const Vector wj = f.solve(gather_vec(residual, j));
    Vector w = Vector::Zero(a_.n());
    for (Index r = 0; r < j.size(); ++r) w(j.idx[r]) = wj(r);
    return w;
  }

 private:
  const SpdMatrix& a_;
  const SketchSampler& sampler_;
  bool cached_;
  std::vector<BlockFactor> factors_;
  std::size_t ord_ = 0;
  IndexSet current_;
  BlockFactor fresh_;
};

void check_partition(const std::vector<IndexSet>& blocks, Index n) {
  if (blocks.empty()) throw ConstraintError("blocks must form a nonempty partition");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  Index total = 0;
  for (const auto& b : blocks) {
    if (b.size() < 1) throw ConstraintError("partition blocks must be nonempty");
    for (Index i : b.idx) {
      if (i < 0 || i >= n || seen[static_cast<std::size_t>(i)])
        throw ConstraintError("blocks do not form a partition of [0, n)");
      seen[static_cast<std::size_t>(i)] = 1;
    }
    total += b.size();
  }
  if (total != n) throw ConstraintError("blocks do not cover [0, n)");
}

}  // namespace

AccelConstants AccelConstants::from_mu_nu(double mu, double nu, double lipschitz) {
  if (!(mu > 0.0) || mu > 1.0 + tol::exact_path)
    throw ConstraintError("AccelConstants: mu must lie in (0, 1]");
  if (!(nu >= 1.0 - tol::exact_path)) throw ConstraintError("AccelConstants: nu must be >= 1");
  AccelConstants c;
  c.mu = mu;
  c.nu = nu;
  c.tau = std::sqrt(mu / nu);
  c.lipschitz = lipschitz;
  if (!(c.tau > 0.0 && c.tau <= 1.0 + tol::exact_path))
    throw ConstraintError("AccelConstants: tau must lie in (0, 1]");
  return c;
}

long ConvergenceTrace::iterations_to(double threshold) const {
  for (const auto& row : rows) {
    if (row.rel_err <= threshold) return row.iter;
  }
  return -1;
}

void ConvergenceTrace::write_csv(std::ostream& out, const std::vector<std::string>& metadata) const {
  for (const auto& line : metadata) out << "# " << line << "\n";
  out << "iter,seconds,rel_err,f_value\n";
  char buf[128];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%.17g\n", row.iter, row.seconds, row.rel_err,
                  row.f_value);
    out << buf;
  }
}

void ConvergenceTrace::write_csv_file(const std::string& path,
                                      const std::vector<std::string>& metadata) const {
  std::ofstream out(path);
  if (!out) throw ConstraintError("write_csv_file: cannot open " + path);
  write_csv(out, metadata);
}

Vector block_step(const SpdMatrix& a, const Vector& residual, const IndexSet& j) {
  if (residual.size() != a.n()) throw ConstraintError("block_step: dimension mismatch");
  const BlockFactor f = factor_block(gather_block(a.data(), j));
  const Vector wj = f.solve(gather_vec(residual, j));
  Vector w = Vector::Zero(a.n());
  for (Index r = 0; r < j.size(); ++r) w(j.idx[r]) = wj(r);
  return w;
}

namespace {

struct TraceBuilder {
  ConvergenceTrace trace;
  const LinearSystem* sys;
  Vector x_star;
  bool record;
  double cum_seconds = 0.0;

  TraceBuilder(const LinearSystem& s, const std::string& id, std::uint64_t seed, bool record_it)
      : sys(&s), x_star(s.solution()), record(record_it) {
    trace.solver_id = id;
    trace.seed = seed;
  }

  // f from the current residual: f(x) = (x.r - b.x)/2 with r = A x - b.
  void add(long iter, const Vector& x, const Vector& r) {
    TraceRow row;
    row.iter = iter;
    row.seconds = cum_seconds;
    row.rel_err = rel_err_a_norm(sys->a, x, x_star);
    row.f_value = 0.5 * (x.dot(r) - sys->b.dot(x));
    trace.rows.push_back(row);
    trace.final_iterate = x;
    if (record) trace.iterates.push_back(x);
  }

  void add_pick(const IndexSet& j) {
    if (record) trace.picked.push_back(j);
  }
};

void validate_common(const LinearSystem& sys, const Vector& x0, const SolveOptions& opts) {
  if (opts.iters < 0) throw ConstraintError("iters must be >= 0");
  if (x0.size() != sys.a.n()) throw ConstraintError("x0 dimension mismatch");
}

}  // namespace

ConvergenceTrace gauss_seidel(const LinearSystem& sys, const SketchSampler& sampler,
                              const Vector& x0, const SolveOptions& opts) {
  validate_common(sys, x0, opts);
  SubBlockSolver solver(sys.a, sampler);
  Rng rng(opts.seed);
  TraceBuilder tb(sys, "gauss_seidel", opts.seed, opts.record_iterates);

  Vector x = x0;
  Vector r = sys.a.data() * x - sys.b;
  tb.add(0, x, r);
  for (long k = 1; k <= opts.iters; ++k) {
    const auto t0 = Clock::now();
    const IndexSet& j = solver.draw(rng);
    x -= solver.solve(r);
    r.noalias() = sys.a.data() * x - sys.b;
    tb.cum_seconds += seconds_between(t0, Clock::now());
    tb.add_pick(j);
    tb.add(k, x, r);
    if (opts.stop_rel_err >= 0.0 && tb.trace.rows.back().rel_err <= opts.stop_rel_err) break;
  }
  return tb.trace;
}

ConvergenceTrace accel_gauss_seidel(const LinearSystem& sys, const SketchSampler& sampler,
                                    const Vector& x0, const AccelConstants& consts,
                                    const SolveOptions& opts) {
  validate_common(sys, x0, opts);
  if (!(consts.tau > 0.0 && consts.tau <= 1.0 + tol::exact_path))
    throw ConstraintError("accel_gauss_seidel: tau must lie in (0, 1]");
  const double tau = consts.tau;
  const double mu = consts.mu;

  SubBlockSolver solver(sys.a, sampler);
  Rng rng(opts.seed);
  TraceBuilder tb(sys, "accel_gauss_seidel", opts.seed, opts.record_iterates);

  Vector y = x0;
  Vector z = x0;
  Vector r = sys.a.data() * x0 - sys.b;
  tb.add(0, y, r);
  for (long k = 1; k <= opts.iters; ++k) {
    const auto t0 = Clock::now();
    const IndexSet& j = solver.draw(rng);
    const Vector x_next = (y + tau * z) / (1.0 + tau);
    r.noalias() = sys.a.data() * x_next - sys.b;
    const Vector w = solver.solve(r);
    y = x_next - w;
    z += tau * (x_next - z) - (tau / mu) * w;
    tb.cum_seconds += seconds_between(t0, Clock::now());
    tb.add_pick(j);
    // f(y) = f(x_next) - w.r/2 for the exact block minimizer.
    {
      TraceRow row;
      row.iter = k;
      row.seconds = tb.cum_seconds;
      row.rel_err = rel_err_a_norm(sys.a, y, tb.x_star);
      row.f_value = 0.5 * (x_next.dot(r) - sys.b.dot(x_next)) - 0.5 * w.dot(r);
      tb.trace.rows.push_back(row);
      tb.trace.final_iterate = y;
      if (tb.record) tb.trace.iterates.push_back(y);
    }
    if (opts.stop_rel_err >= 0.0 && tb.trace.rows.back().rel_err <= opts.stop_rel_err) break;
  }
  return tb.trace;
}

double block_diag_strong_convexity(const SpdMatrix& a, const std::vector<IndexSet>& blocks) {
  check_partition(blocks, a.n());
  Matrix binv_sqrt = Matrix::Zero(a.n(), a.n());
  for (const auto& b : blocks) {
    const Matrix sub = gather_block(a.data(), b);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sub);
    Vector d(b.size());
    for (Index i = 0; i < b.size(); ++i) {
      const double lam = es.eigenvalues()(i);
      if (lam <= 0.0)
        throw NumericalError("block_diag_strong_convexity: singular diagonal block");
      d(i) = 1.0 / std::sqrt(lam);
    }
    const Matrix inv_sqrt = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
    for (Index r = 0; r < b.size(); ++r)
      for (Index c = 0; c < b.size(); ++c) binv_sqrt(b.idx[r], b.idx[c]) = inv_sqrt(r, c);
  }
  const Matrix m = binv_sqrt * a.data() * binv_sqrt;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

ConvergenceTrace accel_coordinate_descent(const LinearSystem& sys,
                                          const std::vector<IndexSet>& blocks, const Vector& x0,
                                          const SolveOptions& opts) {
  validate_common(sys, x0, opts);
  check_partition(blocks, sys.a.n());
  const std::size_t m = blocks.size();
  const double mu = block_diag_strong_convexity(sys.a, blocks);
  // B_i = A_{J_i} gives L_i = 1, so tau = sqrt(mu)/m and sampling is uniform.
  const double tau = std::sqrt(mu) / static_cast<double>(m);
  const std::vector<double> probs(m, 1.0 / static_cast<double>(m));

  std::vector<BlockFactor> factors;
  factors.reserve(m);
  for (const auto& b : blocks) factors.push_back(factor_block(gather_block(sys.a.data(), b)));

  Rng rng(opts.seed);
  TraceBuilder tb(sys, "accel_cd", opts.seed, opts.record_iterates);

  Vector y = x0;
  Vector z = x0;
  Vector r = sys.a.data() * x0 - sys.b;
  tb.add(0, y, r);
  for (long k = 1; k <= opts.iters; ++k) {
    const auto t0 = Clock::now();
    const std::size_t i = pick_weighted(rng, probs);
    const Vector x_next = (y + tau * z) / (1.0 + tau);
    r.noalias() = sys.a.data() * x_next - sys.b;
    const Vector wj = factors[i].solve(gather_vec(r, blocks[i]));
    Vector w = Vector::Zero(sys.a.n());
    for (Index t = 0; t < blocks[i].size(); ++t) w(blocks[i].idx[t]) = wj(t);
    y = x_next - w;
    z += tau * (x_next - z) - (tau / (mu * probs[i])) * w;
    tb.cum_seconds += seconds_between(t0, Clock::now());
    tb.add_pick(blocks[i]);
    TraceRow row;
    row.iter = k;
    row.seconds = tb.cum_seconds;
    row.rel_err = rel_err_a_norm(sys.a, y, tb.x_star);
    row.f_value = 0.5 * (x_next.dot(r) - sys.b.dot(x_next)) - 0.5 * w.dot(r);
    tb.trace.rows.push_back(row);
    tb.trace.final_iterate = y;
    if (tb.record) tb.trace.iterates.push_back(y);
    if (opts.stop_rel_err >= 0.0 && row.rel_err <= opts.stop_rel_err) break;
  }
  return tb.trace;
}

ConvergenceTrace acdm(const LinearSystem& sys, const std::vector<IndexSet>& blocks,
                      const Vector& x0, const SolveOptions& opts, double sigma, AcdmLog* log) {
  validate_common(sys, x0, opts);
  check_partition(blocks, sys.a.n());
  const std::size_t m = blocks.size();
  const double md = static_cast<double>(m);
  if (sigma < 0.0) sigma = block_diag_strong_convexity(sys.a, blocks);
  if (!(md * md - sigma > 1e-9 * md * md))
    throw NumericalError("acdm: degenerate scalar recursion (sigma >= m^2)");
  const std::vector<double> probs(m, 1.0 / md);

  std::vector<BlockFactor> factors;
  factors.reserve(m);
  for (const auto& b : blocks) factors.push_back(factor_block(gather_block(sys.a.data(), b)));

  Rng rng(opts.seed);
  TraceBuilder tb(sys, "acdm", opts.seed, opts.record_iterates);
  if (log) {
    log->sigma = sigma;
    log->blocks = blocks;
    log->block_probs = probs;
    log->steps.clear();
  }

  Vector x = x0;
  Vector z = x0;
  // Modified initialization keeps sigma * A_k == B_k, hence alpha_k == beta_k.
  double big_a = 1.0;
  double big_b = sigma;
  Vector r = sys.a.data() * x - sys.b;
  tb.add(0, x, r);
  for (long k = 1; k <= opts.iters; ++k) {
    const auto t0 = Clock::now();
    const std::size_t i = pick_weighted(rng, probs);
    // Positive root of a^2 m^2 = (A_k + a)(B_k + sigma a).
    const double qa = md * md - sigma;
    const double qb = big_b + sigma * big_a;
    const double disc = qb * qb + 4.0 * qa * big_a * big_b;
    if (disc < 0.0) throw NumericalError("acdm: negative discriminant");
    const double a_next = (qb + std::sqrt(disc)) / (2.0 * qa);
    const double big_a1 = big_a + a_next;
    const double big_b1 = big_b + sigma * a_next;
    const double alpha = a_next / big_a1;
    const double beta = sigma * a_next / big_b1;

    const Vector y = ((1.0 - alpha) * x + alpha * (1.0 - beta) * z) / (1.0 - alpha * beta);
    r.noalias() = sys.a.data() * y - sys.b;
    const Vector wj = factors[i].solve(gather_vec(r, blocks[i]));
    Vector w = Vector::Zero(sys.a.n());
    for (Index t = 0; t < blocks[i].size(); ++t) w(blocks[i].idx[t]) = wj(t);
    x = y - w;
    z = (1.0 - beta) * z + beta * y - (md * a_next / big_b1) * w;
    big_a = big_a1;
    big_b = big_b1;
    tb.cum_seconds += seconds_between(t0, Clock::now());
    tb.add_pick(blocks[i]);
    if (log) log->steps.push_back({big_a, big_b, a_next, alpha, beta, sigma});
    TraceRow row;
    row.iter = k;
    row.seconds = tb.cum_seconds;
    row.rel_err = rel_err_a_norm(sys.a, x, tb.x_star);
    row.f_value = 0.5 * (y.dot(r) - sys.b.dot(y)) - 0.5 * w.dot(r);
    tb.trace.rows.push_back(row);
    tb.trace.final_iterate = x;
    if (tb.record) tb.trace.iterates.push_back(x);
    if (opts.stop_rel_err >= 0.0 && row.rel_err <= opts.stop_rel_err) break;
  }
  return tb.trace;
}

namespace {

// Kaczmarz row-block step machinery: applies (S^T A)^+ = A_J^T (A_J A_J^T)^+.
class RowBlockSolver {
 public:
  RowBlockSolver(const Matrix& a, const SketchSampler& sampler)
      : a_(a), sampler_(sampler), cached_(sampler.mode() != SketchSampler::Mode::UniformRandom) {
    if (sampler.n() != a.rows())
      throw ConstraintError("row sampler dimension does not match the matrix rows");
    if (cached_) {
      factors_.reserve(sampler.blocks().size());
      for (const auto& b : sampler.blocks()) factors_.push_back(factor_rows(b));
    }
  }

  const IndexSet& draw(Rng& rng) {
    if (cached_) {
      ord_ = sampler_.sample_ordinal(rng);
      return sampler_.blocks()[ord_];
    }
    current_ = sampler_.sample(rng);
    fresh_ = factor_rows(current_);
    return current_;
  }

  /// (S^T A)^+ S^T (A x - b) for the drawn row set.
  Vector solve(const Vector& x, const Vector& b) const {
    const IndexSet& j = cached_ ? sampler_.blocks()[ord_] : current_;
    const BlockFactor& f = cached_ ? factors_[ord_] : fresh_;
    Vector rj(j.size());
    for (Index t = 0; t < j.size(); ++t) rj(t) = a_.row(j.idx[t]).dot(x) - b(j.idx[t]);
    const Vector u = f.solve(rj);
    Vector w = Vector::Zero(a_.cols());
    for (Index t = 0; t < j.size(); ++t) w += a_.row(j.idx[t]).transpose() * u(t);
    return w;
  }

 private:
  BlockFactor factor_rows(const IndexSet& j) const {
    Matrix aj(j.size(), a_.cols());
    for (Index t = 0; t < j.size(); ++t) aj.row(t) = a_.row(j.idx[t]);
    return factor_block(aj * aj.transpose());
  }

  const Matrix& a_;
  const SketchSampler& sampler_;
  bool cached_;
  std::vector<BlockFactor> factors_;
  std::size_t ord_ = 0;
  IndexSet current_;
  BlockFactor fresh_;
};

Vector kaczmarz_setup(const Matrix& a, const Vector& b) {
  if (b.size() != a.rows()) throw ConstraintError("kaczmarz: b dimension mismatch");
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  if (qr.rank() < a.cols())
    throw ConstraintError("kaczmarz: matrix is rank-deficient (rank " +
                          std::to_string(qr.rank()) + " < " + std::to_string(a.cols()) + ")");
  Vector x_star = qr.solve(b);
  if ((a * x_star - b).norm() > 1e-8 * b.norm())
    throw ConstraintError("kaczmarz: b is not in the range of A");
  if (x_star.isZero(0.0)) throw ConstraintError("kaczmarz: zero solution, relative error undefined");
  return x_star;
}

void kaczmarz_record(ConvergenceTrace& trace, long iter, double cum_seconds, const Vector& x,
                     const Vector& x_star, bool record) {
  TraceRow row;
  row.iter = iter;
  row.seconds = cum_seconds;
  row.rel_err = (x - x_star).norm() / x_star.norm();
  row.f_value = 0.5 * (x - x_star).squaredNorm();
  trace.rows.push_back(row);
  trace.final_iterate = x;
  if (record) trace.iterates.push_back(x);
}

}  // namespace

ConvergenceTrace kaczmarz(const Matrix& a, const Vector& b, const SketchSampler& row_sampler,
                          const Vector& x0, const SolveOptions& opts) {
  if (opts.iters < 0) throw ConstraintError("iters must be >= 0");
  if (x0.size() != a.cols()) throw ConstraintError("x0 dimension mismatch");
  const Vector x_star = kaczmarz_setup(a, b);
  RowBlockSolver solver(a, row_sampler);
  Rng rng(opts.seed);

  ConvergenceTrace trace;
  trace.solver_id = "kaczmarz";
  trace.seed = opts.seed;
  Vector x = x0;
  double cum = 0.0;
  kaczmarz_record(trace, 0, cum, x, x_star, opts.record_iterates);
  for (long k = 1; k <= opts.iters; ++k) {
    const auto t0 = Clock::now();
    const IndexSet& j = solver.draw(rng);
    x -= solver.solve(x, b);
    cum += seconds_between(t0, Clock::now());
    if (opts.record_iterates) trace.picked.push_back(j);
    kaczmarz_record(trace, k, cum, x, x_star, opts.record_iterates);
    if (opts.stop_rel_err >= 0.0 && trace.rows.back().rel_err <= opts.stop_rel_err) break;
  }
  return trace;
}

ConvergenceTrace accel_kaczmarz(const Matrix& a, const Vector& b, const SketchSampler& row_sampler,
                                const Vector& x0, const AccelConstants& consts,
                                const SolveOptions& opts) {
  if (opts.iters < 0) throw ConstraintError("iters must be >= 0");
  if (x0.size() != a.cols()) throw ConstraintError("x0 dimension mismatch");
  if (!(consts.mu > 0.0)) throw ConstraintError("accel_kaczmarz: mu must be positive");
  const Vector x_star = kaczmarz_setup(a, b);
  RowBlockSolver solver(a, row_sampler);
  Rng rng(opts.seed);
  const double tau = consts.tau;

  ConvergenceTrace trace;
  trace.solver_id = "accel_kaczmarz";
  trace.seed = opts.seed;
  Vector y = x0;
  Vector z = x0;
  double cum = 0.0;
  kaczmarz_record(trace, 0, cum, y, x_star, opts.record_iterates);
  for (long k = 1; k <= opts.iters; ++k) {
    const auto t0 = Clock::now();
    const IndexSet& j = solver.draw(rng);
    const Vector x_next = (y + tau * z) / (1.0 + tau);
    const Vector w = solver.solve(x_next, b);
    y = x_next - w;
    z += tau * (x_next - z) - (tau / consts.mu) * w;
    cum += seconds_between(t0, Clock::now());
    if (opts.record_iterates) trace.picked.push_back(j);
    kaczmarz_record(trace, k, cum, y, x_star, opts.record_iterates);
    if (opts.stop_rel_err >= 0.0 && trace.rows.back().rel_err <= opts.stop_rel_err) break;
  }
  return trace;
}

ConvergenceTrace conjugate_gradient(const LinearSystem& sys, const Vector& x0, double tolerance,
                                    long max_iters) {
  if (max_iters < 1) throw ConstraintError("conjugate_gradient: max_iters >= 1 required");
  if (x0.size() != sys.a.n()) throw ConstraintError("x0 dimension mismatch");
  TraceBuilder tb(sys, "cg", 0, false);

  const double b_norm = sys.b.norm();
  Vector x = x0;
  Vector r = sys.b - sys.a.data() * x;
  tb.add(0, x, -r);
  if (r.norm() <= tolerance * b_norm) return tb.trace;

  Vector p = r;
  double rr = r.squaredNorm();
  for (long k = 1; k <= max_iters; ++k) {
    const auto t0 = Clock::now();
    const Vector ap = sys.a.data() * p;
    const double pap = p.dot(ap);
    if (pap <= 0.0)
      throw NumericalError("conjugate_gradient: breakdown, p^T A p <= 0");
    const double step = rr / pap;
    x += step * p;
    r -= step * ap;
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
    tb.cum_seconds += seconds_between(t0, Clock::now());
    tb.add(k, x, -r);
    if (std::sqrt(rr) <= tolerance * b_norm) break;
  }
  return tb.trace;
}

double lyapunov_value(const LinearSystem& sys, const AccelConstants& consts,
                      const SpdMatrix& g_inverse, const Vector& y, const Vector& z) {
  if (g_inverse.n() != sys.a.n()) throw ConstraintError("lyapunov_value: dimension mismatch");
  const Vector x_star = sys.solution();
  const Vector ey = y - x_star;
  const Vector ez = z - x_star;
  const double f_gap = 0.5 * ey.dot(sys.a.data() * ey);
  return f_gap + 0.5 * consts.mu * ez.dot(g_inverse.data() * ez);
}

}  // namespace bgs
