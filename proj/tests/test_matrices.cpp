#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "bgs/matrices.hpp"
#include "bgs/rng.hpp"

using namespace bgs;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

Vector sorted_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

TEST_CASE("make_alpha_beta matches the direct formula") {
  const SpdMatrix a = make_alpha_beta(2, 1.0, 2.0);
  CHECK(a(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(a(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a(1, 1) == doctest::Approx(2.0).epsilon(1e-15));

  const SpdMatrix id4 = make_alpha_beta(4, 1.0, 0.0);
  CHECK((id4.data() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("make_alpha_beta eigenvalues against the eigensolver oracle") {
  const SpdMatrix a = make_alpha_beta(3, 1.0, 3.0);
  const Vector eig = sorted_eigenvalues(a.data());
  CHECK(eig(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(eig(1) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(eig(2) == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("make_alpha_beta rejects out-of-domain parameters") {
  CHECK_THROWS_AS(make_alpha_beta(0, 1.0, 0.0), ConstraintError);
  CHECK_THROWS_AS(make_alpha_beta(3, 0.0, 1.0), ConstraintError);
  CHECK_THROWS_AS(make_alpha_beta(3, -1.0, 0.5), ConstraintError);
  CHECK_THROWS_AS(make_alpha_beta(3, 1.0, -1.0), ConstraintError);
  CHECK_THROWS_WITH_AS(make_alpha_beta(3, 1.0, -2.0), doctest::Contains("alpha + beta > 0"),
                       ConstraintError);
}

TEST_CASE("alpha_beta is invariant under permutation conjugation") {
  const SpdMatrix a = make_alpha_beta(6, 2.0, 5.0);
  Rng rng(11);
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<Index> perm(6);
    for (Index i = 0; i < 6; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (Index i = 5; i > 0; --i)
      std::swap(perm[static_cast<std::size_t>(i)],
                perm[static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(i + 1)))]);
    Matrix permuted(6, 6);
    for (Index i = 0; i < 6; ++i)
      for (Index j = 0; j < 6; ++j)
        permuted(i, j) = a(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    CHECK((permuted - a.data()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("SpdMatrix validation rejects indefinite input") {
  Matrix bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // eigenvalues -1 and 3
  CHECK_THROWS_AS(SpdMatrix{bad}, ConstraintError);
  Matrix zero = Matrix::Zero(3, 3);
  CHECK_THROWS_AS(SpdMatrix{zero}, ConstraintError);
}

TEST_CASE("sobolev entries follow min(i, j)") {
  EnsembleSpec spec;
  spec.kind = EnsembleSpec::Kind::Sobolev;
  spec.n = 3;
  const SpdMatrix a = generate_ensemble(spec);
  Matrix expect(3, 3);
  expect << 1, 1, 1, 1, 2, 2, 1, 2, 3;
  CHECK((a.data() - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tridiagonal hits the requested minimum eigenvalue") {
  EnsembleSpec spec;
  spec.kind = EnsembleSpec::Kind::Tridiagonal;
  spec.n = 16;
  spec.delta = 0.1;
  const SpdMatrix a = generate_ensemble(spec);
  const Vector eig = sorted_eigenvalues(a.data());
  CHECK(eig(0) == doctest::Approx(0.1).epsilon(1e-8));
  CHECK_THROWS_AS(
      [] {
        EnsembleSpec bad;
        bad.kind = EnsembleSpec::Kind::Tridiagonal;
        bad.n = 8;
        bad.delta = 1.5;
        return generate_ensemble(bad);
      }(),
      ConstraintError);
}

TEST_CASE("wishart draw is positive definite per the eigensolver oracle") {
  EnsembleSpec spec;
  spec.kind = EnsembleSpec::Kind::Wishart;
  spec.n = 16;
  spec.m = 18;
  spec.seed = 5;
  const SpdMatrix a = generate_ensemble(spec);
  CHECK(sorted_eigenvalues(a.data())(0) > 0.0);
  spec.m = 10;
  CHECK_THROWS_AS(generate_ensemble(spec), ConstraintError);
}

TEST_CASE("linspace ensemble has the prescribed spectrum") {
  EnsembleSpec spec;
  spec.kind = EnsembleSpec::Kind::LinspaceEig;
  spec.n = 12;
  spec.kappa_max = 50.0;
  spec.seed = 3;
  const SpdMatrix a = generate_ensemble(spec);
  const Vector eig = sorted_eigenvalues(a.data());
  for (Index i = 0; i < 12; ++i) {
    const double expect = 1.0 + (50.0 - 1.0) * static_cast<double>(i) / 11.0;
    CHECK(eig(i) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("circulant ensemble is real with eigenvalues from the symbol") {
  EnsembleSpec spec;
  spec.kind = EnsembleSpec::Kind::Circulant;
  spec.n = 16;
  const SpdMatrix a = generate_ensemble(spec);
  // Eigenvalues of the circulant are exactly the symbol values c_j.
  std::vector<double> symbol;
  for (Index j = 0; j < 16; ++j) symbol.push_back(1.0 / static_cast<double>(std::min(j, 16 - j) + 1));
  std::sort(symbol.begin(), symbol.end());
  const Vector eig = sorted_eigenvalues(a.data());
  for (Index i = 0; i < 16; ++i)
    CHECK(eig(i) == doctest::Approx(symbol[static_cast<std::size_t>(i)]).epsilon(1e-10));
}

TEST_CASE("circulant realification holds for odd n as well") {
  EnsembleSpec spec;
  spec.kind = EnsembleSpec::Kind::Circulant;
  spec.n = 15;
  const SpdMatrix a = generate_ensemble(spec);  // imaginary-residue guard inside
  CHECK(a.lambda_min() > 0.0);
  // Circulant: every row is a rotation of the first.
  for (Index i = 1; i < 15; ++i)
    for (Index j = 0; j < 15; ++j)
      CHECK(a(i, j) == doctest::Approx(a(0, (j - i + 15) % 15)).epsilon(1e-12));
}

TEST_CASE("ensemble generation is reproducible bit-for-bit") {
  for (const auto kind : {EnsembleSpec::Kind::LinspaceEig, EnsembleSpec::Kind::Wishart}) {
    EnsembleSpec spec;
    spec.kind = kind;
    spec.n = 10;
    spec.m = 14;
    spec.kappa_max = 25.0;
    spec.seed = 99;
    const SpdMatrix a = generate_ensemble(spec);
    const SpdMatrix b = generate_ensemble(spec);
    CHECK((a.data() - b.data()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("rel_err_a_norm hand-checked values") {
  const SpdMatrix id = make_alpha_beta(2, 1.0, 0.0);
  Vector x_star(2);
  x_star << 1.0, 0.0;
  CHECK(rel_err_a_norm(id, x_star, x_star) == 0.0);
  CHECK(rel_err_a_norm(id, Vector::Zero(2), x_star) == doctest::Approx(1.0).epsilon(1e-15));

  const SpdMatrix a = make_alpha_beta(2, 1.0, 2.0);  // [[2,1],[1,2]]
  Vector ones(2);
  ones << 1.0, 1.0;
  // Hand evaluation: e = -ones, e^T A e = 6, ones^T A ones = 6.
  CHECK(rel_err_a_norm(a, Vector::Zero(2), ones) == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(rel_err_a_norm(a, ones, Vector::Zero(2)), ConstraintError);
}

TEST_CASE("matrix file round-trip is bit-exact") {
  const std::string path = temp_path("bgs_roundtrip.spdmat");
  const SpdMatrix a = make_alpha_beta(3, 1.0, 2.0);
  write_matrix(path, a);
  const SpdMatrix back = read_matrix(path);
  CHECK((a.data() - back.data()).cwiseAbs().maxCoeff() == 0.0);

  EnsembleSpec spec;
  spec.kind = EnsembleSpec::Kind::Wishart;
  spec.n = 7;
  spec.m = 9;
  spec.seed = 21;
  const SpdMatrix w = generate_ensemble(spec);
  write_matrix(path, w);
  const SpdMatrix wback = read_matrix(path);
  CHECK((w.data() - wback.data()).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("matrix file format is parsed literally") {
  const std::string path = temp_path("bgs_literal.spdmat");
  {
    std::ofstream out(path);
    out << "spdmat 1 2\n2 1\n1 2\n";
  }
  const SpdMatrix a = read_matrix(path);
  CHECK(a(0, 0) == 2.0);
  CHECK(a(0, 1) == 1.0);
  CHECK(a(1, 1) == 2.0);
  std::filesystem::remove(path);
}

TEST_CASE("matrix file errors carry the offending location") {
  const std::string path = temp_path("bgs_bad.spdmat");
  {
    std::ofstream out(path);
    out << "spdmat 1 3\n2 1 0\n1 2 0\n";  // header says 3 rows, body has 2
  }
  CHECK_THROWS_WITH_AS(read_matrix(path), doctest::Contains("expected 3 rows"), ParseError);
  {
    std::ofstream out(path);
    out << "spdmag 1 2\n2 1\n1 2\n";
  }
  CHECK_THROWS_WITH_AS(read_matrix(path), doctest::Contains("malformed header"), ParseError);
  {
    std::ofstream out(path);
    out << "spdmat 1 2\n2 1\n1.5 2\n";  // asymmetric
  }
  CHECK_THROWS_WITH_AS(read_matrix(path), doctest::Contains("asymmetric"), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("every ensemble passes SPD validation at n = 16") {
  std::vector<EnsembleSpec> specs(6);
  specs[0].kind = EnsembleSpec::Kind::AlphaBeta;
  specs[0].alpha = 1.0;
  specs[0].beta = 100.0;
  specs[1].kind = EnsembleSpec::Kind::LinspaceEig;
  specs[1].kappa_max = 1000.0;
  specs[2].kind = EnsembleSpec::Kind::Wishart;
  specs[2].m = 18;
  specs[3].kind = EnsembleSpec::Kind::Sobolev;
  specs[4].kind = EnsembleSpec::Kind::Circulant;
  specs[5].kind = EnsembleSpec::Kind::Tridiagonal;
  specs[5].delta = 0.1;
  for (auto& spec : specs) {
    spec.n = 16;
    spec.seed = 7;
    const SpdMatrix a = generate_ensemble(spec);  // construction validates
    CHECK(a.lambda_min() > 0.0);
  }
}

TEST_CASE("linear system validates a provided solution") {
  const SpdMatrix a = make_alpha_beta(4, 1.0, 1.0);
  const Vector b = gaussian_rhs(4, 2);
  const LinearSystem sys = make_system(a, b);
  REQUIRE(sys.x_star.has_value());
  CHECK((a.data() * (*sys.x_star) - b).norm() <= 1e-10 * b.norm());
  Vector wrong = *sys.x_star;
  wrong(0) += 1.0;
  CHECK_THROWS_AS(LinearSystem(a, b, wrong), ConstraintError);
}
