#include "bgs/matrices.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bgs/rng.hpp"

namespace bgs {

namespace {

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SpdMatrix::SpdMatrix(Matrix entries) {
  if (entries.rows() != entries.cols() || entries.rows() < 1) {
    throw ConstraintError("SpdMatrix: entries must be square with n >= 1");
  }
  a_ = symmetrized(entries);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a_, Eigen::EigenvaluesOnly);
  lambda_min_ = es.eigenvalues().minCoeff();
  lambda_max_ = es.eigenvalues().maxCoeff();
  if (!(lambda_max_ > 0.0) || lambda_min_ <= -tol::spd_slack * lambda_max_) {
    throw ConstraintError("SpdMatrix: matrix is not positive definite (lambda_min = " +
                          fmt_double(lambda_min_) + ", lambda_max = " + fmt_double(lambda_max_) +
                          ")");
  }
}

Matrix SpdMatrix::sqrt() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a_);
  Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return symmetrized(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose());
}

Matrix SpdMatrix::inv_sqrt() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a_);
  Vector d(n());
  for (Index i = 0; i < n(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam <= 0.0) throw NumericalError("SpdMatrix::inv_sqrt: nonpositive eigenvalue");
    d(i) = 1.0 / std::sqrt(lam);
  }
  return symmetrized(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose());
}

Matrix SpdMatrix::inverse() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a_);
  Vector d(n());
  for (Index i = 0; i < n(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam <= 0.0) throw NumericalError("SpdMatrix::inverse: nonpositive eigenvalue");
    d(i) = 1.0 / lam;
  }
  return symmetrized(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose());
}

void EnsembleSpec::validate() const {
  if (n < 1) throw ConstraintError("EnsembleSpec: n >= 1 violated");
  switch (kind) {
    case Kind::AlphaBeta:
      if (!(alpha > 0.0)) throw ConstraintError("EnsembleSpec: alpha > 0 violated");
      if (!(alpha + beta > 0.0)) throw ConstraintError("EnsembleSpec: alpha + beta > 0 violated");
      break;
    case Kind::LinspaceEig:
      if (!(kappa_max >= 1.0)) throw ConstraintError("EnsembleSpec: kappa_max >= 1 violated");
      break;
    case Kind::Wishart:
      if (m < n) throw ConstraintError("EnsembleSpec: m >= n violated");
      break;
    case Kind::Sobolev:
      break;
    case Kind::Circulant:
      break;
    case Kind::Tridiagonal:
      if (!(delta > 0.0 && delta < 1.0))
        throw ConstraintError("EnsembleSpec: 0 < delta < 1 violated");
      if (n < 2) throw ConstraintError("EnsembleSpec: tridiagonal requires n >= 2");
      break;
  }
}

std::string EnsembleSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::AlphaBeta:
      os << "alpha_beta n=" << n << " alpha=" << alpha << " beta=" << beta;
      break;
    case Kind::LinspaceEig:
      os << "linspace n=" << n << " kappa_max=" << kappa_max << " seed=" << seed;
      break;
    case Kind::Wishart:
      os << "wishart n=" << n << " m=" << m << " seed=" << seed;
      break;
    case Kind::Sobolev:
      os << "sobolev n=" << n;
      break;
    case Kind::Circulant:
      os << "circulant n=" << n;
      break;
    case Kind::Tridiagonal:
      os << "tridiagonal n=" << n << " delta=" << delta;
      break;
  }
  return os.str();
}

SpdMatrix make_alpha_beta(Index n, double alpha, double beta) {
  if (n < 1) throw ConstraintError("make_alpha_beta: n >= 1 violated");
  if (!(alpha > 0.0)) throw ConstraintError("make_alpha_beta: alpha > 0 violated");
  if (!(alpha + beta > 0.0)) throw ConstraintError("make_alpha_beta: alpha + beta > 0 violated");
  Matrix a = Matrix::Constant(n, n, beta / static_cast<double>(n));
  a.diagonal().array() += alpha;
  return SpdMatrix(std::move(a));
}

namespace {

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
  return m;
}

// Haar-like orthogonal factor: QR of a Gaussian draw with the sign of the
// R diagonal fixed, so the result is deterministic in the seed.
Matrix random_orthogonal(Index n, Rng& rng) {
  Matrix g = gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

SpdMatrix make_linspace_eig(Index n, double kappa_max, std::uint64_t seed) {
  Rng rng(seed);
  Vector eig(n);
  if (n == 1) {
    eig(0) = 1.0;
  } else {
    for (Index i = 0; i < n; ++i)
      eig(i) = 1.0 + (kappa_max - 1.0) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  Matrix q = random_orthogonal(n, rng);
  return SpdMatrix(q * eig.asDiagonal() * q.transpose());
}

SpdMatrix make_wishart(Index n, Index m, std::uint64_t seed) {
  Rng rng(seed);
  Matrix b = gaussian_matrix(m, n, rng);
  return SpdMatrix(b.transpose() * b);
}

SpdMatrix make_sobolev(Index n) {
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = static_cast<double>(std::min(i, j) + 1);
  return SpdMatrix(std::move(a));
}

SpdMatrix make_circulant(Index n) {
  using Complex = std::complex<double>;
  Eigen::VectorXcd c(n);
  for (Index j = 0; j < n; ++j) {
    const Index k = std::min(j, n - j);  // wraps so that c_j = c_{n-j}
    c(j) = Complex(1.0 / static_cast<double>(k + 1), 0.0);
  }
  Eigen::MatrixXcd f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < n; ++k) {
      const double angle = -2.0 * M_PI * static_cast<double>(j) * static_cast<double>(k) /
                           static_cast<double>(n);
      f(j, k) = scale * Complex(std::cos(angle), std::sin(angle));
    }
  }
  Eigen::MatrixXcd prod = f * c.asDiagonal() * f.adjoint();
  const double imag_residue = prod.imag().cwiseAbs().maxCoeff();
  if (imag_residue >= 1e-10) {
    throw NumericalError("circulant: imaginary residue " + fmt_double(imag_residue) +
                         " exceeds 1e-10");
  }
  return SpdMatrix(prod.real());
}

SpdMatrix make_tridiagonal(Index n, double delta) {
  // Off-diagonal chosen so the Toeplitz eigenvalue formula gives
  // lambda_min = delta with unit diagonal.
  const double off =
      (delta - 1.0) / (2.0 * std::cos(M_PI * static_cast<double>(n) / static_cast<double>(n + 1)));
  Matrix a = Matrix::Zero(n, n);
  a.diagonal().setOnes();
  for (Index i = 0; i + 1 < n; ++i) {
    a(i, i + 1) = off;
    a(i + 1, i) = off;
  }
  return SpdMatrix(std::move(a));
}

}  // namespace

SpdMatrix generate_ensemble(const EnsembleSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case EnsembleSpec::Kind::AlphaBeta:
      return make_alpha_beta(spec.n, spec.alpha, spec.beta);
    case EnsembleSpec::Kind::LinspaceEig:
      return make_linspace_eig(spec.n, spec.kappa_max, spec.seed);
    case EnsembleSpec::Kind::Wishart:
      return make_wishart(spec.n, spec.m, spec.seed);
    case EnsembleSpec::Kind::Sobolev:
      return make_sobolev(spec.n);
    case EnsembleSpec::Kind::Circulant:
      return make_circulant(spec.n);
    case EnsembleSpec::Kind::Tridiagonal:
      return make_tridiagonal(spec.n, spec.delta);
  }
  throw ConstraintError("generate_ensemble: unknown kind");
}

double a_norm(const SpdMatrix& a, const Vector& v) {
  if (v.size() != a.n()) throw ConstraintError("a_norm: dimension mismatch");
  return std::sqrt(std::max(0.0, v.dot(a.data() * v)));
}

double rel_err_a_norm(const SpdMatrix& a, const Vector& x, const Vector& x_star) {
  if (x.size() != a.n() || x_star.size() != a.n())
    throw ConstraintError("rel_err_a_norm: dimension mismatch");
  const double denom = x_star.dot(a.data() * x_star);
  if (x_star.isZero(0.0) || denom <= 0.0)
    throw ConstraintError("rel_err_a_norm: x_star must be nonzero");
  const Vector e = x - x_star;
  return std::max(0.0, e.dot(a.data() * e)) / denom;
}

void write_matrix(const std::string& path, const SpdMatrix& a) {
  std::ofstream out(path);
  if (!out) throw ConstraintError("write_matrix: cannot open " + path);
  const Index n = a.n();
  out << "spdmat 1 " << n << "\n";
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (j) out << ' ';
      out << fmt_double(a(i, j));
    }
    out << "\n";
  }
  if (!out) throw ConstraintError("write_matrix: write failed for " + path);
}

SpdMatrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("read_matrix: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ":1: empty file");
  std::istringstream header(line);
  std::string magic;
  int version = 0;
  long long n_ll = 0;
  if (!(header >> magic >> version >> n_ll) || magic != "spdmat" || version != 1 || n_ll < 1) {
    throw ParseError(path + ":1: malformed header, expected 'spdmat 1 <n>'");
  }
  const Index n = static_cast<Index>(n_ll);
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw ParseError(path + ":" + std::to_string(i + 2) + ": expected " + std::to_string(n) +
                       " rows, found " + std::to_string(i));
    }
    std::istringstream row(line);
    for (Index j = 0; j < n; ++j) {
      if (!(row >> a(i, j))) {
        throw ParseError(path + ":" + std::to_string(i + 2) + ": expected " + std::to_string(n) +
                         " entries in row");
      }
    }
    double extra;
    if (row >> extra) {
      throw ParseError(path + ":" + std::to_string(i + 2) + ": row has more than " +
                       std::to_string(n) + " entries");
    }
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (a(i, j) != a(j, i)) {
        throw ParseError(path + ": asymmetric entries at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
      }
    }
  }
  return SpdMatrix(std::move(a));
}

Vector gaussian_rhs(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Vector b(n);
  for (Index i = 0; i < n; ++i) b(i) = rng.next_gaussian();
  return b;
}

Vector direct_solve(const SpdMatrix& a, const Vector& b) {
  if (b.size() != a.n()) throw ConstraintError("direct_solve: dimension mismatch");
  Eigen::LLT<Matrix> llt(a.data());
  if (llt.info() != Eigen::Success) {
    // Near-singular but validated SPD: fall back to the eigendecomposition.
    return a.inverse() * b;
  }
  return llt.solve(b);
}

LinearSystem::LinearSystem(SpdMatrix a_in, Vector b_in, std::optional<Vector> x_star_in)
    : a(std::move(a_in)), b(std::move(b_in)), x_star(std::move(x_star_in)) {
  if (b.size() != a.n()) throw ConstraintError("LinearSystem: b dimension mismatch");
  if (x_star) {
    if (x_star->size() != a.n()) throw ConstraintError("LinearSystem: x_star dimension mismatch");
    const double resid = (a.data() * (*x_star) - b).norm();
    if (resid > 1e-8 * b.norm()) {
      throw ConstraintError("LinearSystem: x_star does not solve A x = b (residual " +
                            fmt_double(resid) + ")");
    }
  }
}

Vector LinearSystem::solution() const {
  if (x_star) return *x_star;
  return direct_solve(a, b);
}

LinearSystem make_system(SpdMatrix a, Vector b) {
  Vector x = direct_solve(a, b);
  return LinearSystem(std::move(a), std::move(b), std::move(x));
}

}  // namespace bgs
