#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

#include "bgs/constants.hpp"
#include "bgs/matrices.hpp"
#include "bgs/rng.hpp"

using namespace bgs;

TEST_CASE("compute_g identity cases") {
  const SpdMatrix id = make_alpha_beta(6, 1.0, 0.0);
  const Matrix g = compute_g(id, SketchSampler::uniform_random(6, 2));
  CHECK((g - (2.0 / 6.0) * Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("compute_g matches the closed-form c I + d 11^T on alpha-beta input") {
  const Index n = 4;
  const Index p = 2;
  const double alpha = 1.0;
  const double beta = 2.0;
  const SpdMatrix a = make_alpha_beta(n, alpha, beta);
  const Matrix g = compute_g(a, SketchSampler::uniform_random(n, p));
  const AlphaBetaMoments mo = alpha_beta_moments_uniform(n, p, alpha, beta);
  const Matrix expect =
      mo.g_id * Matrix::Identity(n, n) + mo.g_ones * Matrix::Ones(n, n);
  CHECK((g - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("compute_g for a fixed partition is the scaled block-inverse blockdiag") {
  const Index n = 6;
  const Index p = 2;
  EnsembleSpec spec;
  spec.kind = EnsembleSpec::Kind::Wishart;
  spec.n = n;
  spec.m = 8;
  spec.seed = 3;
  const SpdMatrix a = generate_ensemble(spec);
  const auto sampler = SketchSampler::fixed_partition(n, p);
  const Matrix g = compute_g(a, sampler);
  // Oracle: direct summation over the stored blocks.
  Matrix expect = Matrix::Zero(n, n);
  for (const auto& block : sampler.blocks()) {
    Matrix sub(p, p);
    for (Index r = 0; r < p; ++r)
      for (Index c = 0; c < p; ++c) sub(r, c) = a(block.idx[r], block.idx[c]);
    const Matrix inv = sub.inverse();
    for (Index r = 0; r < p; ++r)
      for (Index c = 0; c < p; ++c)
        expect(block.idx[r], block.idx[c]) = inv(r, c) * (static_cast<double>(p) / n);
  }
  CHECK((g - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("compute_mu examples") {
  const SpdMatrix id = make_alpha_beta(6, 1.0, 0.0);
  CHECK(compute_mu(id, SketchSampler::uniform_random(6, 2)) ==
        doctest::Approx(2.0 / 6.0).epsilon(1e-12));

  const SpdMatrix a = make_alpha_beta(4, 1.0, 2.0);
  // Uniform closed form: 0.25 + 4/24 = 5/12; fixed-partition closed form: 0.25.
  CHECK(compute_mu(a, SketchSampler::uniform_random(4, 2)) ==
        doctest::Approx(5.0 / 12.0).epsilon(1e-9));
  CHECK(compute_mu(a, SketchSampler::fixed_partition(4, 2)) ==
        doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("compute_nu identity and closed-form cross-checks") {
  const SpdMatrix id = make_alpha_beta(6, 1.0, 0.0);
  CHECK(compute_nu(id, SketchSampler::uniform_random(6, 2)) ==
        doctest::Approx(3.0).epsilon(1e-12));

  const Index n = 4;
  const Index p = 2;
  const SpdMatrix a = make_alpha_beta(n, 1.0, 2.0);
  const double nu_enum = compute_nu(a, SketchSampler::uniform_random(n, p));
  const double nu_closed = closed_form_nu_uniform(n, p, 1.0, 2.0);
  CHECK(nu_enum == doctest::Approx(nu_closed).epsilon(1e-9));
  CHECK(nu_enum >= static_cast<double>(n) / static_cast<double>(p) - 1e-9);

  // Fixed partitions satisfy E[H G^{-1} H] = (n/p) G identically.
  CHECK(compute_nu(a, SketchSampler::fixed_partition(n, p)) ==
        doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("closed_form_mu examples and limits") {
  CHECK(closed_form_mu(4, 2, 1.0, 2.0, SketchSampler::Mode::FixedPartition) ==
        doctest::Approx(0.25).epsilon(1e-15));
  CHECK(closed_form_mu(4, 2, 1.0, 2.0, SketchSampler::Mode::UniformRandom) ==
        doctest::Approx(5.0 / 12.0).epsilon(1e-15));
  CHECK(closed_form_mu(8, 2, 1.0, 0.0, SketchSampler::Mode::UniformRandom) ==
        doctest::Approx(0.25).epsilon(1e-15));
  CHECK(closed_form_mu(8, 2, 3.0, 1e-12, SketchSampler::Mode::UniformRandom) ==
        doctest::Approx(0.25).epsilon(1e-9));
  CHECK_THROWS_AS(closed_form_mu(8, 1, 1.0, 1.0, SketchSampler::Mode::UniformRandom),
                  ConstraintError);
  CHECK_THROWS_AS(closed_form_mu(8, 3, 1.0, 1.0, SketchSampler::Mode::FixedPartition),
                  ConstraintError);
}

TEST_CASE("closed forms agree with enumeration over the parameter grid") {
  for (const Index n : {4, 6}) {
    for (const Index p : {2, 3}) {
      if (p >= n) continue;
      for (const double beta : {0.5, 2.0, 100.0}) {
        for (const double alpha : {1.0, 3.0}) {
          const SpdMatrix a = make_alpha_beta(n, alpha, beta);
          const double mu_u = compute_mu(a, SketchSampler::uniform_random(n, p));
          CHECK(std::abs(mu_u - closed_form_mu(n, p, alpha, beta,
                                               SketchSampler::Mode::UniformRandom)) <= 1e-9);
          const double nu_u = compute_nu(a, SketchSampler::uniform_random(n, p));
          CHECK(std::abs(nu_u - closed_form_nu_uniform(n, p, alpha, beta)) <= 1e-9);
          if (n % p == 0) {
            const double mu_f = compute_mu(a, SketchSampler::fixed_partition(n, p));
            CHECK(std::abs(mu_f - closed_form_mu(n, p, alpha, beta,
                                                 SketchSampler::Mode::FixedPartition)) <= 1e-9);
          }
        }
      }
    }
  }
}

TEST_CASE("negative-beta family: mu formula from the illustrative example") {
  const Index n = 8;
  const Index p = 2;
  const double delta = 0.5;
  const SpdMatrix a_delta = make_alpha_beta(n, n + delta, -static_cast<double>(n));
  const double mu = compute_mu(a_delta, SketchSampler::uniform_random(n, p));
  const double expect = static_cast<double>(p) * delta /
                        (static_cast<double>(n) * (static_cast<double>(n - p) + delta));
  CHECK(mu == doctest::Approx(expect).epsilon(1e-9));
  CHECK(closed_form_mu(n, p, n + delta, -static_cast<double>(n),
                       SketchSampler::Mode::UniformRandom) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("monte carlo estimates approach the identity-case truth") {
  const SpdMatrix id = make_alpha_beta(100, 1.0, 0.0);
  const auto rep = estimate_mu_nu_mc(id, SketchSampler::uniform_random(100, 10), 20000, 7);
  CHECK(std::abs(rep.mu - 0.1) <= 0.01);
  CHECK(std::abs(rep.nu - 10.0) <= 1.0);
  CHECK(rep.method == ConstantsReport::Method::MonteCarlo);

  const auto rep2 = estimate_mu_nu_mc(id, SketchSampler::uniform_random(100, 10), 20000, 7);
  CHECK(rep.mu == rep2.mu);
  CHECK(rep.nu == rep2.nu);

  CHECK_THROWS_AS(estimate_mu_nu_mc(id, SketchSampler::uniform_random(100, 10), 10, 7),
                  ConstraintError);
}

TEST_CASE("monte carlo estimates land within three standard errors of exact") {
  // The extremal-eigenvalue estimators are biased when the extreme eigenvalue
  // is degenerate (as on the alpha-beta family), so the check runs on the
  // Sobolev kernel, whose relevant spectra are simple.
  const Index n = 8;
  const Index p = 2;
  EnsembleSpec spec;
  spec.kind = EnsembleSpec::Kind::Sobolev;
  spec.n = n;
  const SpdMatrix a = generate_ensemble(spec);
  const auto sampler = SketchSampler::uniform_random(n, p);
  const double mu_exact = compute_mu(a, sampler);
  const double nu_exact = compute_nu(a, sampler);

  const int reps = 6;
  std::vector<double> mus, nus;
  for (int r = 0; r < reps; ++r) {
    const auto rep = estimate_mu_nu_mc(a, sampler, 100000, 100 + static_cast<std::uint64_t>(r));
    mus.push_back(rep.mu);
    nus.push_back(rep.nu);
  }
  const auto check_within = [&](const std::vector<double>& vals, double exact) {
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= reps;
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= (reps - 1);
    const double se = std::sqrt(var);
    for (double v : vals) CHECK(std::abs(v - exact) <= 3.0 * se + 1e-12);
  };
  check_within(mus, mu_exact);
  check_within(nus, nu_exact);
}

TEST_CASE("kappa_eff exhaustive scan and closed form") {
  const SpdMatrix id = make_alpha_beta(6, 1.0, 0.0);
  CHECK(kappa_eff(id, 2) == doctest::Approx(1.0).epsilon(1e-12));
  const auto bounds_id = nu_bounds(id, 2);
  CHECK(bounds_id.first == doctest::Approx(3.0));
  CHECK(bounds_id.second == doctest::Approx(3.0).epsilon(1e-12));

  // A_delta = A_{n+delta,-n}: kappa_eff = (n-1+delta)/(n-p+delta).
  const Index n = 4;
  const double delta = 1.0;
  const SpdMatrix a_delta = make_alpha_beta(n, n + delta, -static_cast<double>(n));
  CHECK(kappa_eff(a_delta, 2) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("computed nu lies inside the Lemma-1 bounds on the Sobolev kernel") {
  EnsembleSpec spec;
  spec.kind = EnsembleSpec::Kind::Sobolev;
  spec.n = 16;
  const SpdMatrix a = generate_ensemble(spec);
  const Index p = 4;
  const double nu = compute_nu(a, SketchSampler::uniform_random(16, p));
  const auto [lower, upper] = nu_bounds(a, p);
  CHECK(nu >= lower - 1e-9);
  CHECK(nu <= upper + 1e-9);
  const double mu = compute_mu(a, SketchSampler::uniform_random(16, p));
  CHECK(nu <= 1.0 / mu + 1e-9);
}

TEST_CASE("trace of the expected projector is exactly p") {
  for (const auto& [alpha, beta] : {std::pair<double, double>{1.0, 2.0}, {3.0, 0.5}}) {
    const Index n = 6;
    const Index p = 2;
    const SpdMatrix a = make_alpha_beta(n, alpha, beta);
    const Matrix g = compute_g(a, SketchSampler::uniform_random(n, p));
    const Matrix as = a.sqrt();
    CHECK((as * g * as).trace() == doctest::Approx(static_cast<double>(p)).epsilon(1e-9));
  }
}

TEST_CASE("G on the alpha-beta family is permutation covariant") {
  const SpdMatrix a = make_alpha_beta(6, 2.0, 7.0);
  const Matrix g = compute_g(a, SketchSampler::uniform_random(6, 3));
  double diag_min = g(0, 0), diag_max = g(0, 0);
  double off_min = g(0, 1), off_max = g(0, 1);
  for (Index i = 0; i < 6; ++i) {
    diag_min = std::min(diag_min, g(i, i));
    diag_max = std::max(diag_max, g(i, i));
    for (Index j = 0; j < 6; ++j) {
      if (i == j) continue;
      off_min = std::min(off_min, g(i, j));
      off_max = std::max(off_max, g(i, j));
    }
  }
  CHECK(diag_max - diag_min <= 1e-12);
  CHECK(off_max - off_min <= 1e-12);
}

TEST_CASE("adversarial start for plain Gauss-Seidel") {
  // Isotropic case: the tie-break returns the first coordinate direction.
  const SpdMatrix id = make_alpha_beta(5, 1.0, 0.0);
  const Vector x_star = Vector::Zero(5);
  const Vector x0 = adversarial_start_gs(id, SketchSampler::uniform_random(5, 2), x_star);
  Vector e1 = Vector::Zero(5);
  e1(0) = 1.0;
  CHECK((x0 - e1).norm() <= 1e-12);

  // A-normalized displacement.
  const SpdMatrix a = make_alpha_beta(4, 1.0, 2.0);
  const Vector xs = gaussian_rhs(4, 3);
  const Vector start = adversarial_start_gs(a, SketchSampler::fixed_partition(4, 2), xs);
  CHECK(a_norm(a, start - xs) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("adversarial start saturates (1-mu)^k under exact propagation") {
  const Index n = 4;
  const Index p = 2;
  const SpdMatrix a = make_alpha_beta(n, 1.0, 2.0);
  const auto sampler = SketchSampler::fixed_partition(n, p);
  const double mu = compute_mu(a, sampler);
  const Vector x_star = Vector::Zero(n);
  const Vector x0 = adversarial_start_gs(a, sampler, x_star);

  // Oracle: propagate the expected iterate through the enumerated support.
  const Matrix as = a.sqrt();
  const auto support = sampler.enumerate_support();
  Matrix prop = Matrix::Zero(n, n);
  for (const auto& [j, prob] : support) {
    Matrix h = Matrix::Zero(n, n);
    Matrix sub(p, p);
    for (Index r = 0; r < p; ++r)
      for (Index c = 0; c < p; ++c) sub(r, c) = a(j.idx[r], j.idx[c]);
    const Matrix inv = sub.inverse();
    for (Index r = 0; r < p; ++r)
      for (Index c = 0; c < p; ++c) h(j.idx[r], j.idx[c]) = inv(r, c);
    prop += prob * (Matrix::Identity(n, n) - as * h * as);
  }
  Vector v = as * (x0 - x_star);
  for (int k = 1; k <= 10; ++k) {
    v = prop * v;
    CHECK(v.norm() == doctest::Approx(std::pow(1.0 - mu, k)).epsilon(1e-10));
  }
}

TEST_CASE("accelerated recurrence matrix has 1 - tau in its spectrum") {
  const Index n = 4;
  const SpdMatrix a = make_alpha_beta(n, 1.0, 2.0);
  const auto sampler = SketchSampler::uniform_random(n, 2);
  const auto consts = exact_constants(a, sampler).accel();
  const Matrix g = compute_g(a, sampler);
  const Matrix r = build_accel_recurrence(a, g, consts);

  Eigen::EigenSolver<Matrix> es(r);
  bool found = false;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()(i).real() - (1.0 - consts.tau)) <= 1e-9 &&
        std::abs(es.eigenvalues()(i).imag()) <= 1e-9) {
      found = true;
    }
  }
  CHECK(found);

  // Spectral-radius lower bound: sigma_max(R^k) >= (1 - tau)^k.
  Matrix rk = Matrix::Identity(2 * n, 2 * n);
  for (int k = 1; k <= 10; ++k) {
    rk = rk * r;
    Eigen::JacobiSVD<Matrix> svd(rk);
    CHECK(std::pow(1.0 - consts.tau, k) <= svd.singularValues()(0) + 1e-9);
  }
}

TEST_CASE("sigma = sqrt(mu) block of the recurrence is upper triangular") {
  // Symbolic 2x2 oracle: at sigma_i = sqrt(mu) the lower-left entry cancels
  // and the diagonal reads ((1 - mu)/(1 + tau), 1 - tau).
  const double mu = 0.37;
  const double nu = 2.5;
  const double tau = std::sqrt(mu / nu);
  const double sigma = std::sqrt(mu);
  const double lower_left = std::sqrt(mu) * tau * (1.0 / sigma - sigma / mu);
  CHECK(std::abs(lower_left) <= 1e-15);
  const double d0 = (1.0 - sigma * sigma) / (1.0 + tau);
  const double d1 = (1.0 - tau * tau * sigma * sigma / mu) / (1.0 + tau);
  CHECK(d0 == doctest::Approx((1.0 - mu) / (1.0 + tau)).epsilon(1e-15));
  CHECK(d1 == doctest::Approx(1.0 - tau).epsilon(1e-14));
}

TEST_CASE("adversarial accelerated start in the degenerate full-block case") {
  const Index n = 3;
  const SpdMatrix id = make_alpha_beta(n, 1.0, 0.0);
  const auto sampler = SketchSampler::uniform_random(n, n);
  const auto consts = AccelConstants::from_mu_nu(1.0, 1.0);
  const Vector x_star = Vector::Zero(n);
  const auto [y0, z0] = adversarial_start_accel(id, sampler, consts, 3, x_star);
  const Matrix g = compute_g(id, sampler);
  const SpdMatrix g_spd(g);
  const Vector ey = id.sqrt() * y0;
  const Vector ez = std::sqrt(consts.mu) * g_spd.inv_sqrt() * z0;
  CHECK(std::sqrt(ey.squaredNorm() + ez.squaredNorm()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kaczmarz constants formula cases") {
  // Orthonormal rows: A^T A = I, mu = 1/m, exact nu = m.
  Matrix q = Matrix::Identity(4, 4);
  const auto [mu, nu_up] = kaczmarz_constants(q, true);
  CHECK(mu == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(nu_up == doctest::Approx(4.0));
  const auto rep = kaczmarz_projector_constants(q, SketchSampler::uniform_random(4, 1));
  CHECK(rep.nu == doctest::Approx(4.0).epsilon(1e-9));

  Matrix bad = Matrix::Identity(3, 3);
  bad(0, 0) = 2.0;
  CHECK_THROWS_WITH_AS(kaczmarz_constants(bad, true), doctest::Contains("norm"), ConstraintError);

  // Random unit rows: enumerated nu stays below m.
  Rng rng(77);
  Matrix a(8, 4);
  for (Index i = 0; i < 8; ++i) {
    for (Index j = 0; j < 4; ++j) a(i, j) = rng.next_gaussian();
    a.row(i) /= a.row(i).norm();
  }
  const auto rep2 = kaczmarz_projector_constants(a, SketchSampler::uniform_random(8, 1));
  CHECK(rep2.nu <= 8.0 + 1e-9);
  CHECK(rep2.mu == doctest::Approx(kaczmarz_constants(a, true).first).epsilon(1e-9));
}

TEST_CASE("semidefinite Jensen inequality checks") {
  // Deterministic distribution: both sides coincide.
  Matrix m(2, 2);
  m << 1.0, 0.5, 0.5, 2.0;
  CHECK(check_semidef_jensen({m}, {1.0}));

  // Two-point distribution over coordinate projectors.
  Matrix e11 = Matrix::Zero(2, 2);
  e11(0, 0) = 1.0;
  Matrix e22 = Matrix::Zero(2, 2);
  e22(1, 1) = 1.0;
  CHECK(check_semidef_jensen({e11, e22}, {0.5, 0.5}));

  // Fuzz: random 3x3 PSD two-point distributions.
  Rng rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix b1(3, 3), b2(3, 3);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j) {
        b1(i, j) = rng.next_gaussian();
        b2(i, j) = rng.next_gaussian();
      }
    const Matrix m1 = b1 * b1.transpose();
    const Matrix m2 = b2 * b2.transpose();
    const double q = 0.05 + 0.9 * rng.next_double();
    CHECK(check_semidef_jensen({m1, m2}, {q, 1.0 - q}));
  }
}

TEST_CASE("exact_constants report fields are consistent") {
  const SpdMatrix a = make_alpha_beta(8, 1.0, 4.0);
  const auto sampler = SketchSampler::uniform_random(8, 2);
  const auto rep = exact_constants(a, sampler);
  CHECK(rep.mu > 0.0);
  CHECK(rep.mu <= 1.0 + 1e-9);
  CHECK(rep.nu >= rep.nu_lower - 1e-9);
  CHECK(rep.nu <= rep.nu_upper + 1e-9);
  CHECK(rep.nu <= 1.0 / rep.mu + 1e-9);
  REQUIRE(rep.kappa_eff.has_value());
  const auto kv = rep.to_key_values();
  CHECK(kv.size() >= 6);
}
