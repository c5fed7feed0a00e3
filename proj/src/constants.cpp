#include "bgs/constants.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <limits>

namespace bgs {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Matrix gather_block(const Matrix& a, const IndexSet& j) {
  const Index p = j.size();
  Matrix sub(p, p);
  for (Index r = 0; r < p; ++r)
    for (Index c = 0; c < p; ++c) sub(r, c) = a(j.idx[r], j.idx[c]);
  return sub;
}

// Thresholded pseudo-inverse of a symmetric matrix.
Matrix pinv_sym(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  const Vector& vals = es.eigenvalues();
  const double threshold = static_cast<double>(m.rows()) *
                           std::numeric_limits<double>::epsilon() * vals.cwiseAbs().maxCoeff();
  Vector inv = Vector::Zero(vals.size());
  for (Index i = 0; i < vals.size(); ++i)
    if (std::abs(vals(i)) > threshold) inv(i) = 1.0 / vals(i);
  Matrix out = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Matrix sym_inverse(const Matrix& m, const char* who) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Vector inv(m.rows());
  for (Index i = 0; i < m.rows(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam <= 0.0) throw NumericalError(std::string(who) + ": matrix not positive definite");
    inv(i) = 1.0 / lam;
  }
  Matrix out = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Matrix sym_inv_sqrt(const Matrix& m, const char* who) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Vector inv(m.rows());
  for (Index i = 0; i < m.rows(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam <= 0.0) throw NumericalError(std::string(who) + ": matrix not positive definite");
    inv(i) = 1.0 / std::sqrt(lam);
  }
  Matrix out = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

double sym_lambda_min(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double sym_lambda_max(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// G accumulated over an explicit support, in deterministic support order.
Matrix g_from_support(const SpdMatrix& a,
                      const std::vector<std::pair<IndexSet, double>>& support) {
  Matrix g = Matrix::Zero(a.n(), a.n());
  for (const auto& [j, prob] : support) {
    const Matrix pinv = pinv_sym(gather_block(a.data(), j));
    for (Index r = 0; r < j.size(); ++r)
      for (Index c = 0; c < j.size(); ++c) g(j.idx[r], j.idx[c]) += prob * pinv(r, c);
  }
  return 0.5 * (g + g.transpose());
}

// E[H G^{-1} H] accumulated over a support given G^{-1}; uses
// H_J G^{-1} H_J = S (A_J^+ G^{-1}[J,J] A_J^+) S^T.
Matrix second_moment_from_support(const SpdMatrix& a,
                                  const std::vector<std::pair<IndexSet, double>>& support,
                                  const Matrix& g_inv) {
  Matrix m = Matrix::Zero(a.n(), a.n());
  for (const auto& [j, prob] : support) {
    const Matrix pinv = pinv_sym(gather_block(a.data(), j));
    const Matrix core = pinv * gather_block(g_inv, j) * pinv;
    for (Index r = 0; r < j.size(); ++r)
      for (Index c = 0; c < j.size(); ++c) m(j.idx[r], j.idx[c]) += prob * core(r, c);
  }
  return 0.5 * (m + m.transpose());
}

double nu_from_g_and_moment(const Matrix& g, const Matrix& moment) {
  const Matrix gis = sym_inv_sqrt(g, "compute_nu");
  return sym_lambda_max(gis * moment * gis);
}

}  // namespace

Matrix compute_g(const SpdMatrix& a, const SketchSampler& sampler, std::size_t budget) {
  if (sampler.n() != a.n()) throw ConstraintError("compute_g: sampler dimension mismatch");
  return g_from_support(a, sampler.enumerate_support(budget));
}

double compute_mu(const SpdMatrix& a, const SketchSampler& sampler, std::size_t budget) {
  const Matrix g = compute_g(a, sampler, budget);
  const Matrix as = a.sqrt();
  return sym_lambda_min(as * g * as);
}

double compute_nu(const SpdMatrix& a, const SketchSampler& sampler, std::size_t budget) {
  const auto support = sampler.enumerate_support(budget);
  const Matrix g = g_from_support(a, support);
  const Matrix g_inv = sym_inverse(g, "compute_nu");
  const Matrix moment = second_moment_from_support(a, support, g_inv);
  return nu_from_g_and_moment(g, moment);
}

ConstantsReport exact_constants(const SpdMatrix& a, const SketchSampler& sampler,
                                std::size_t budget, bool allow_sampled_kappa) {
  const auto support = sampler.enumerate_support(budget);
  ConstantsReport rep;
  rep.method = ConstantsReport::Method::ExactEnumeration;
  rep.g = g_from_support(a, support);
  const Matrix as = a.sqrt();
  rep.mu = sym_lambda_min(as * rep.g * as);
  const Matrix g_inv = sym_inverse(rep.g, "exact_constants");
  rep.nu = nu_from_g_and_moment(rep.g, second_moment_from_support(a, support, g_inv));
  rep.nu_lower = static_cast<double>(a.n()) / static_cast<double>(sampler.p());
  if (sampler.mode() == SketchSampler::Mode::UniformRandom && sampler.p() > 1 &&
      sampler.p() < a.n()) {
    const std::size_t count = binomial_capped(a.n(), sampler.p(), budget);
    if (count <= budget || allow_sampled_kappa) {
      rep.kappa_eff = kappa_eff(a, sampler.p(), allow_sampled_kappa, 0, budget);
      rep.kappa_eff_sampled = count > budget;
      const double bp = static_cast<double>(sampler.p() - 1) / static_cast<double>(a.n() - 1);
      rep.nu_upper = rep.nu_lower * (bp + (1.0 - bp) * (*rep.kappa_eff));
    } else {
      rep.nu_upper = 1.0 / rep.mu;
    }
  } else {
    rep.nu_upper = 1.0 / rep.mu;
  }
  return rep;
}

ConstantsReport estimate_mu_nu_mc(const SpdMatrix& a, const SketchSampler& sampler, long samples,
                                  std::uint64_t seed) {
  if (samples < 1000) throw ConstraintError("estimate_mu_nu_mc: samples >= 1000 required");
  if (sampler.n() != a.n()) throw ConstraintError("estimate_mu_nu_mc: sampler dimension mismatch");
  Rng rng(seed);
  std::vector<IndexSet> draws;
  draws.reserve(static_cast<std::size_t>(samples));
  for (long s = 0; s < samples; ++s) draws.push_back(sampler.sample(rng));

  const double w = 1.0 / static_cast<double>(samples);
  Matrix g = Matrix::Zero(a.n(), a.n());
  std::vector<Matrix> pinvs;
  pinvs.reserve(draws.size());
  for (const auto& j : draws) {
    pinvs.push_back(pinv_sym(gather_block(a.data(), j)));
    const Matrix& pinv = pinvs.back();
    for (Index r = 0; r < j.size(); ++r)
      for (Index c = 0; c < j.size(); ++c) g(j.idx[r], j.idx[c]) += w * pinv(r, c);
  }
  g = 0.5 * (g + g.transpose());

  if (sym_lambda_min(g) <= tol::spd_slack * sym_lambda_max(g)) {
    throw NumericalError("estimate_mu_nu_mc: G estimate numerically singular; increase samples");
  }
  const Matrix g_inv = sym_inverse(g, "estimate_mu_nu_mc");
  Matrix moment = Matrix::Zero(a.n(), a.n());
  for (std::size_t s = 0; s < draws.size(); ++s) {
    const IndexSet& j = draws[s];
    const Matrix core = pinvs[s] * gather_block(g_inv, j) * pinvs[s];
    for (Index r = 0; r < j.size(); ++r)
      for (Index c = 0; c < j.size(); ++c) moment(j.idx[r], j.idx[c]) += w * core(r, c);
  }
  moment = 0.5 * (moment + moment.transpose());

  ConstantsReport rep;
  rep.method = ConstantsReport::Method::MonteCarlo;
  rep.samples = samples;
  rep.g = g;
  const Matrix as = a.sqrt();
  rep.mu = sym_lambda_min(as * g * as);
  rep.nu = nu_from_g_and_moment(g, moment);
  rep.nu_lower = static_cast<double>(a.n()) / static_cast<double>(sampler.p());
  rep.nu_upper = 1.0 / rep.mu;
  return rep;
}

double closed_form_mu(Index n, Index p, double alpha, double beta, SketchSampler::Mode mode) {
  if (!(alpha > 0.0)) throw ConstraintError("closed_form_mu: alpha > 0 violated");
  if (!(alpha + beta > 0.0)) throw ConstraintError("closed_form_mu: alpha + beta > 0 violated");
  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  const double denom = nd * alpha + pd * beta;
  if (mode == SketchSampler::Mode::UniformRandom) {
    if (!(p > 1 && p < n)) throw ConstraintError("closed_form_mu: uniform mode needs 1 < p < n");
    const double a_coef =
        pd * ((nd - 1.0) * alpha + (pd - 1.0) * beta) / ((nd - 1.0) * denom);
    const double d_coef = (nd - pd) * pd * beta / (nd * (nd - 1.0) * denom);
    return std::min(a_coef, a_coef + nd * d_coef);
  }
  if (mode == SketchSampler::Mode::FixedPartition) {
    if (p < 1 || p > n || n % p != 0)
      throw ConstraintError("closed_form_mu: fixed mode needs p | n");
    const Index k = n / p;
    double mu = pd * (alpha + beta) / denom;  // eigenvector 1_n
    if (k >= 2) mu = std::min(mu, pd * alpha / denom);
    if (n > k) mu = std::min(mu, pd / nd);
    return mu;
  }
  throw ConstraintError("closed_form_mu: unsupported sampler mode");
}

AlphaBetaMoments alpha_beta_moments_uniform(Index n, Index p, double alpha, double beta) {
  if (!(p > 1 && p < n)) throw ConstraintError("alpha_beta_moments_uniform: need 1 < p < n");
  if (!(alpha > 0.0) || !(alpha + beta > 0.0))
    throw ConstraintError("alpha_beta_moments_uniform: need alpha > 0 and alpha + beta > 0");
  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  const double denom = nd * alpha + pd * beta;  // n alpha + p beta
  const double mix = (nd - 1.0) * alpha + (pd - 1.0) * beta;

  AlphaBetaMoments mo;
  mo.g_id = pd / (alpha * nd) * (1.0 - beta * (nd - pd) / ((nd - 1.0) * denom));
  mo.g_ones = -(pd * (pd - 1.0) * beta) / (nd * (nd - 1.0) * alpha * denom);
  mo.m_id = 1.0 / alpha - (nd - pd) * (nd - pd) * beta / ((nd - 1.0) * mix * denom);
  mo.m_ones = (pd - 1.0) * beta *
              (nd * alpha * (1.0 - 2.0 * nd) + nd * pd * (alpha - beta) + pd * beta) /
              ((nd - 1.0) * nd * alpha * mix * denom);
  return mo;
}

double closed_form_nu_uniform(Index n, Index p, double alpha, double beta) {
  const AlphaBetaMoments mo = alpha_beta_moments_uniform(n, p, alpha, beta);
  const double nd = static_cast<double>(n);
  // G and E[H G^{-1} H] share the eigenbasis {1_n, 1_n^perp}; nu is the
  // largest generalized eigenvalue.
  const double on_perp = mo.m_id / mo.g_id;
  const double on_ones = (mo.m_id + nd * mo.m_ones) / (mo.g_id + nd * mo.g_ones);
  return std::max(on_perp, on_ones);
}

double kappa_eff(const SpdMatrix& a, Index p, bool allow_sampled, std::uint64_t seed,
                 std::size_t budget, long sample_count) {
  if (!(p > 1 && p < a.n())) throw ConstraintError("kappa_eff: need 1 < p < n");
  const auto eval = [&](const IndexSet& j) {
    double max_diag = 0.0;
    for (Index i : j.idx) max_diag = std::max(max_diag, a(i, i));
    const double lmin = sym_lambda_min(gather_block(a.data(), j));
    if (lmin <= 0.0) throw NumericalError("kappa_eff: singular sub-block");
    return max_diag / lmin;
  };
  const std::size_t count = binomial_capped(a.n(), p, budget);
  double best = 0.0;
  if (count <= budget) {
    for (const auto& [j, prob] : SketchSampler::uniform_random(a.n(), p).enumerate_support(budget)) {
      (void)prob;
      best = std::max(best, eval(j));
    }
    return best;
  }
  if (!allow_sampled) {
    throw ConstraintError("kappa_eff: C(n,p) exceeds budget; pass allow_sampled for a sampled "
                          "lower estimate");
  }
  const SketchSampler sampler = SketchSampler::uniform_random(a.n(), p);
  Rng rng(seed);
  for (long s = 0; s < sample_count; ++s) best = std::max(best, eval(sampler.sample(rng)));
  return best;
}

std::pair<double, double> nu_bounds(const SpdMatrix& a, Index p, bool allow_sampled,
                                    std::uint64_t seed, std::size_t budget) {
  const double lower = static_cast<double>(a.n()) / static_cast<double>(p);
  const double kap = kappa_eff(a, p, allow_sampled, seed, budget);
  const double bp = static_cast<double>(p - 1) / static_cast<double>(a.n() - 1);
  return {lower, lower * (bp + (1.0 - bp) * kap)};
}

Matrix expected_iterate_matrix(const SpdMatrix& a, const Matrix& g) {
  const Matrix as = a.sqrt();
  Matrix m = Matrix::Identity(a.n(), a.n()) - as * g * as;
  return 0.5 * (m + m.transpose());
}

Vector extreme_eigenvector(const Matrix& sym, bool largest) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sym + sym.transpose()));
  const Vector& vals = es.eigenvalues();
  const Index n = vals.size();
  const double target = largest ? vals(n - 1) : vals(0);
  const double tie = 1e-12 * std::max(1.0, std::abs(target));
  Index pick = largest ? n - 1 : 0;
  double best_first = -1.0;
  for (Index i = 0; i < n; ++i) {
    if (std::abs(vals(i) - target) <= tie) {
      const double first = std::abs(es.eigenvectors()(0, i));
      if (first > best_first) {
        best_first = first;
        pick = i;
      }
    }
  }
  Vector v = es.eigenvectors().col(pick);
  for (Index i = 0; i < n; ++i) {
    if (v(i) != 0.0) {
      if (v(i) < 0.0) v = -v;
      break;
    }
  }
  return v;
}

Vector adversarial_start_gs(const SpdMatrix& a, const SketchSampler& sampler,
                            const Vector& x_star) {
  if (x_star.size() != a.n()) throw ConstraintError("adversarial_start_gs: dimension mismatch");
  const Matrix g = compute_g(a, sampler);
  const Vector v = extreme_eigenvector(expected_iterate_matrix(a, g), true);
  return x_star + a.inv_sqrt() * v;
}

Matrix build_accel_recurrence(const SpdMatrix& a, const Matrix& g, const AccelConstants& consts) {
  const Index n = a.n();
  const double tau = consts.tau;
  const double mu = consts.mu;
  const SpdMatrix g_spd(g);
  const Matrix as = a.sqrt();
  const Matrix gs = g_spd.sqrt();
  const Matrix q = as * gs;
  const Matrix q_inv = g_spd.inv_sqrt() * a.inv_sqrt();
  const Matrix qtq = q.transpose() * q;
  const Matrix qqt = q * q.transpose();

  Matrix r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = Matrix::Identity(n, n) - qqt;
  r.topRightCorner(n, n) = (tau / std::sqrt(mu)) * (q - qqt * q);
  r.bottomLeftCorner(n, n) = std::sqrt(mu) * tau * (q_inv - q.transpose() / mu);
  r.bottomRightCorner(n, n) = Matrix::Identity(n, n) - (tau * tau / mu) * qtq;
  return r / (1.0 + tau);
}

std::pair<Vector, Vector> adversarial_start_accel(const SpdMatrix& a,
                                                  const SketchSampler& sampler,
                                                  const AccelConstants& consts, long k,
                                                  const Vector& x_star) {
  if (k < 1) throw ConstraintError("adversarial_start_accel: k >= 1 required");
  if (x_star.size() != a.n()) throw ConstraintError("adversarial_start_accel: dimension mismatch");
  const Index n = a.n();
  const Matrix g = compute_g(a, sampler);
  const Matrix r = build_accel_recurrence(a, g, consts);
  Matrix rk = r;
  for (long i = 1; i < k; ++i) rk = rk * r;

  Eigen::JacobiSVD<Matrix> svd(rk, Eigen::ComputeFullV);
  const Vector& sigmas = svd.singularValues();
  const double tie = 1e-12 * std::max(1.0, sigmas(0));
  Index pick = 0;
  double best_first = -1.0;
  for (Index i = 0; i < sigmas.size(); ++i) {
    if (sigmas(0) - sigmas(i) <= tie) {
      const double first = std::abs(svd.matrixV()(0, i));
      if (first > best_first) {
        best_first = first;
        pick = i;
      }
    }
  }
  Vector w = svd.matrixV().col(pick);
  for (Index i = 0; i < w.size(); ++i) {
    if (w(i) != 0.0) {
      if (w(i) < 0.0) w = -w;
      break;
    }
  }

  const SpdMatrix g_spd(g);
  const Vector y0 = x_star + a.inv_sqrt() * w.head(n);
  const Vector z0 = x_star + g_spd.sqrt() * w.tail(n) / std::sqrt(consts.mu);
  return {y0, z0};
}

std::pair<double, double> kaczmarz_constants(const Matrix& a, bool unit_rows) {
  const Index m = a.rows();
  if (m < 1 || a.cols() < 1) throw ConstraintError("kaczmarz_constants: empty matrix");
  if (unit_rows) {
    for (Index i = 0; i < m; ++i) {
      const double norm = a.row(i).norm();
      if (std::abs(norm - 1.0) > 1e-9)
        throw ConstraintError("kaczmarz_constants: row " + std::to_string(i) +
                              " has norm " + fmt_double(norm) + ", expected 1");
    }
  }
  const double mu = sym_lambda_min(a.transpose() * a) / static_cast<double>(m);
  return {mu, static_cast<double>(m)};
}

ConstantsReport kaczmarz_projector_constants(const Matrix& a, const SketchSampler& row_sampler,
                                             std::size_t budget) {
  if (row_sampler.n() != a.rows())
    throw ConstraintError("kaczmarz_projector_constants: sampler must range over rows");
  const Index n = a.cols();
  const auto support = row_sampler.enumerate_support(budget);

  std::vector<Matrix> projectors;
  projectors.reserve(support.size());
  Matrix g = Matrix::Zero(n, n);
  for (const auto& [j, prob] : support) {
    Matrix aj(j.size(), n);
    for (Index t = 0; t < j.size(); ++t) aj.row(t) = a.row(j.idx[t]);
    Matrix proj = aj.transpose() * pinv_sym(aj * aj.transpose()) * aj;
    proj = 0.5 * (proj + proj.transpose());
    g += prob * proj;
    projectors.push_back(std::move(proj));
  }
  g = 0.5 * (g + g.transpose());

  const Matrix g_inv = sym_inverse(g, "kaczmarz_projector_constants");
  Matrix moment = Matrix::Zero(n, n);
  for (std::size_t s = 0; s < support.size(); ++s) {
    moment += support[s].second * projectors[s] * g_inv * projectors[s];
  }
  moment = 0.5 * (moment + moment.transpose());

  ConstantsReport rep;
  rep.method = ConstantsReport::Method::ExactEnumeration;
  rep.g = g;
  rep.mu = sym_lambda_min(g);
  rep.nu = nu_from_g_and_moment(g, moment);
  rep.nu_lower = static_cast<double>(n) / static_cast<double>(row_sampler.p());
  rep.nu_upper = 1.0 / rep.mu;
  return rep;
}

bool check_semidef_jensen(const std::vector<Matrix>& ms, const std::vector<double>& probs) {
  if (ms.empty() || ms.size() != probs.size())
    throw ConstraintError("check_semidef_jensen: matrices and probs must be nonempty and match");
  const Index rows = ms.front().rows();
  const Index cols = ms.front().cols();
  Matrix lhs = Matrix::Zero(rows, rows);
  Matrix mean = Matrix::Zero(rows, cols);
  Matrix mtm = Matrix::Zero(cols, cols);
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const Matrix& m = ms[i];
    if (m.rows() != rows || m.cols() != cols)
      throw ConstraintError("check_semidef_jensen: inconsistent dimensions");
    // Projector onto range(M) via SVD.
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
    const double threshold = static_cast<double>(std::max(rows, cols)) *
                             std::numeric_limits<double>::epsilon() *
                             (svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
    Matrix proj = Matrix::Zero(rows, rows);
    for (Index s = 0; s < svd.singularValues().size(); ++s) {
      if (svd.singularValues()(s) > threshold)
        proj += svd.matrixU().col(s) * svd.matrixU().col(s).transpose();
    }
    lhs += probs[i] * proj;
    mean += probs[i] * m;
    mtm += probs[i] * m.transpose() * m;
  }
  const Matrix rhs = mean * pinv_sym(0.5 * (mtm + mtm.transpose())) * mean.transpose();
  return sym_lambda_min(lhs - rhs) >= -1e-9;
}

std::vector<std::string> ConstantsReport::to_key_values() const {
  std::vector<std::string> out;
  out.push_back("mu=" + fmt_double(mu));
  out.push_back("nu=" + fmt_double(nu));
  out.push_back("tau=" + fmt_double(std::sqrt(mu / nu)));
  out.push_back(std::string("method=") +
                (method == Method::ExactEnumeration ? "exact_enumeration" : "monte_carlo"));
  if (method == Method::MonteCarlo) out.push_back("samples=" + std::to_string(samples));
  out.push_back("nu_lower=" + fmt_double(nu_lower));
  out.push_back("nu_upper=" + fmt_double(nu_upper));
  if (kappa_eff) {
    out.push_back("kappa_eff=" + fmt_double(*kappa_eff));
    out.push_back(std::string("kappa_eff_sampled=") + (kappa_eff_sampled ? "1" : "0"));
  }
  return out;
}

}  // namespace bgs
