#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bgs/matrices.hpp"
#include "bgs/sketch.hpp"
#include "bgs/solvers.hpp"
#include "bgs/types.hpp"

namespace bgs {

/// Output of the exact or Monte-Carlo constant computations.
struct ConstantsReport {
  enum class Method { ExactEnumeration, MonteCarlo };

  double mu = 0.0;
  double nu = 0.0;
  Matrix g;  // E[H]
  Method method = Method::ExactEnumeration;
  long samples = 0;  // Monte Carlo only
  double nu_lower = 0.0;       // n/p
  double nu_upper = 0.0;       // block-conditioning bound (uniform), else 1/mu
  std::optional<double> kappa_eff;
  bool kappa_eff_sampled = false;  // true when kappa_eff is a sampled lower estimate

  AccelConstants accel() const { return AccelConstants::from_mu_nu(mu, nu); }

  /// Flat key=value lines, one per entry (g omitted).
  std::vector<std::string> to_key_values() const;
};

/// G = E[S (S^T A S)^+ S^T] by exact support enumeration.
Matrix compute_g(const SpdMatrix& a, const SketchSampler& sampler,
                 std::size_t budget = SketchSampler::kDefaultSupportBudget);

/// mu = lambda_min(A^{1/2} G A^{1/2}) from the exact G.
double compute_mu(const SpdMatrix& a, const SketchSampler& sampler,
                  std::size_t budget = SketchSampler::kDefaultSupportBudget);

/// nu = lambda_max(E[(G^{-1/2} H G^{-1/2})^2]) by exact support enumeration.
double compute_nu(const SpdMatrix& a, const SketchSampler& sampler,
                  std::size_t budget = SketchSampler::kDefaultSupportBudget);

/// Exact report: mu, nu, G and the bounds. kappa_eff is filled for
/// UniformRandom when the subset scan fits the budget (or sampled when
/// allow_sampled_kappa is set).
ConstantsReport exact_constants(const SpdMatrix& a, const SketchSampler& sampler,
                                std::size_t budget = SketchSampler::kDefaultSupportBudget,
                                bool allow_sampled_kappa = false);

/// Monte-Carlo estimate of (mu, nu, G) from `samples` iid draws (>= 1000).
/// Reproducible by seed; throws NumericalError when the G estimate is
/// numerically singular.
ConstantsReport estimate_mu_nu_mc(const SpdMatrix& a, const SketchSampler& sampler, long samples,
                                  std::uint64_t seed);

/// Closed-form mu for A_{alpha,beta} under the two sampling modes.
/// FixedPartition requires p | n; UniformRandom requires 1 < p < n.
double closed_form_mu(Index n, Index p, double alpha, double beta, SketchSampler::Mode mode);

/// Closed forms of G = g_id I + g_ones 11^T and E[H G^{-1} H] =
/// m_id I + m_ones 11^T for A_{alpha,beta} under uniform column sampling.
struct AlphaBetaMoments {
  double g_id = 0.0;
  double g_ones = 0.0;
  double m_id = 0.0;
  double m_ones = 0.0;
};
AlphaBetaMoments alpha_beta_moments_uniform(Index n, Index p, double alpha, double beta);

/// Closed-form nu for A_{alpha,beta} under uniform column sampling.
double closed_form_nu_uniform(Index n, Index p, double alpha, double beta);

/// kappa_eff_p(A) = max over |J| = p of max_{i in J} A_ii / lambda_min(A_J).
/// Exhaustive when C(n,p) fits the budget; otherwise a seeded sampled maximum
/// (a lower estimate) when allow_sampled is set, else an error.
double kappa_eff(const SpdMatrix& a, Index p, bool allow_sampled = false,
                 std::uint64_t seed = 0,
                 std::size_t budget = SketchSampler::kDefaultSupportBudget,
                 long sample_count = 10000);

/// (n/p, (n/p) (beta' + (1 - beta') kappa_eff_p)) with beta' = (p-1)/(n-1).
std::pair<double, double> nu_bounds(const SpdMatrix& a, Index p, bool allow_sampled = false,
                                    std::uint64_t seed = 0,
                                    std::size_t budget = SketchSampler::kDefaultSupportBudget);

/// I - A^{1/2} G A^{1/2}: the exact expected-iterate propagation matrix of
/// block Gauss-Seidel, acting on A^{1/2} e_k.
Matrix expected_iterate_matrix(const SpdMatrix& a, const Matrix& g);

/// Worst-case start for plain Gauss-Seidel: x_* + A^{-1/2} v with v the top
/// eigenvector of the propagation matrix, so ||E[A^{1/2} e_k]|| = (1-mu)^k.
Vector adversarial_start_gs(const SpdMatrix& a, const SketchSampler& sampler,
                            const Vector& x_star);

/// The 2n x 2n expected-iterate recurrence matrix R of the accelerated
/// sequence, acting on P^{1/2} (y - x_*, z - x_*).
Matrix build_accel_recurrence(const SpdMatrix& a, const Matrix& g, const AccelConstants& consts);

/// Worst-case accelerated start (y_0, z_0) decoded from a top right-singular
/// vector of R^k.
std::pair<Vector, Vector> adversarial_start_accel(const SpdMatrix& a, const SketchSampler& sampler,
                                                  const AccelConstants& consts, long k,
                                                  const Vector& x_star);

/// For unit-norm rows under uniform single-row sampling:
/// mu = lambda_min(A^T A)/m and the bound nu <= m.
std::pair<double, double> kaczmarz_constants(const Matrix& a, bool unit_rows);

/// Exact (mu, nu, G) for the Kaczmarz projector family H = P_{A^T S} by
/// enumerating the row sampler's support.
ConstantsReport kaczmarz_projector_constants(const Matrix& a, const SketchSampler& row_sampler,
                                             std::size_t budget = SketchSampler::kDefaultSupportBudget);

/// Checks E[P_M] >= E[M] (E[M^T M])^+ E[M^T] up to -1e-9 on the smallest
/// eigenvalue of the difference.
bool check_semidef_jensen(const std::vector<Matrix>& ms, const std::vector<double>& probs);

/// Deterministic extreme eigenvector of a symmetric matrix: among eigenvectors
/// whose eigenvalue ties the extreme (relative tolerance 1e-12), picks the one
/// with the largest |first coordinate| and fixes its sign positive.
Vector extreme_eigenvector(const Matrix& sym, bool largest);

}  // namespace bgs
