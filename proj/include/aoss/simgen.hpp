#pragma once

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "aoss/error.hpp"
#include "aoss/rng.hpp"
#include "aoss/types.hpp"

namespace aoss {

/// One synthetic covariate scenario: distribution case, size and seed.
struct CaseSpec {
  int case_id = 1;  // 1..6
  Index n = 0;
  int p = 7;
  std::uint64_t seed = 0;
};

/// Ground truth of one simulated replicate.
struct TrueModelSpec {
  Vector beta;       // length p, zeros outside the active set
  double beta0 = 0.25;
  double sigma = 1.0;
  std::vector<Index> active_set;  // indices of nonzero slopes
};

/// AR(1)-style covariance: entry (i,j) = 0.5^|i-j|.
inline Matrix covariance_sigma1(int p) {
  if (p < 1) throw ValidationError("covariance_sigma1: p >= 1 required");
  Matrix s(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) s(i, j) = std::pow(0.5, std::abs(i - j));
  return s;
}

/// Compound-symmetric covariance: 1 on the diagonal, 0.5 elsewhere.
inline Matrix covariance_sigma2(int p) {
  if (p < 1) throw ValidationError("covariance_sigma2: p >= 1 required");
  Matrix s = Matrix::Constant(p, p, 0.5);
  s.diagonal().setOnes();
  return s;
}

namespace detail {

inline Matrix cholesky_lower(const Matrix& sigma) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw ValidationError("covariance matrix is not positive definite");
  return llt.matrixL();
}

}  // namespace detail

/// Draws the n-by-p covariate matrix for the requested case:
///   1: N(0, Sigma1)            4: multivariate t3, scale Sigma1
///   2: N(0, Sigma2)            5: multivariate t3, scale Sigma2
///   3: per-row fair mixture    6: componentwise exp of N(0, Sigma2)
/// of cases 1 and 2. The t3 draw is z / sqrt(w/3) with w ~ chi^2_3.
inline Matrix gen_covariates(const CaseSpec& spec) {
  if (spec.case_id < 1 || spec.case_id > 6)
    throw ValidationError("case must be in 1..6, got " + std::to_string(spec.case_id));
  if (spec.n < 2) throw ValidationError("gen_covariates: n >= 2 required");
  if (spec.p < 1) throw ValidationError("gen_covariates: p >= 1 required");

  const Index n = spec.n;
  const int p = spec.p;
  Rng rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const Matrix l1 = detail::cholesky_lower(covariance_sigma1(p));
  const Matrix l2 = detail::cholesky_lower(covariance_sigma2(p));

  Matrix z(n, p);
  Vector row_scale;            // cases 4-5
  std::vector<char> use_second;  // case 3
  if (spec.case_id == 3) use_second.resize(n);
  if (spec.case_id == 4 || spec.case_id == 5) row_scale.resize(n);

  std::bernoulli_distribution coin(0.5);
  std::chi_squared_distribution<double> chi3(3.0);
  for (Index i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z(i, j) = gauss(rng);
    if (spec.case_id == 3) use_second[i] = coin(rng) ? 1 : 0;
    if (spec.case_id == 4 || spec.case_id == 5)
      row_scale(i) = 1.0 / std::sqrt(chi3(rng) / 3.0);
  }

  Matrix x;
  switch (spec.case_id) {
    case 1: x = z * l1.transpose(); break;
    case 2: x = z * l2.transpose(); break;
    case 3: {
      Matrix x1 = z * l1.transpose();
      Matrix x2 = z * l2.transpose();
      x.resize(n, p);
      for (Index i = 0; i < n; ++i)
        x.row(i) = use_second[i] ? x2.row(i) : x1.row(i);
      break;
    }
    case 4: x = (z * l1.transpose()).array().colwise() * row_scale.array(); break;
    case 5: x = (z * l2.transpose()).array().colwise() * row_scale.array(); break;
    case 6: x = (z * l2.transpose()).array().exp(); break;
  }
  return x;
}

/// Draws the benchmark slope configuration for p = 7: beta1, beta2 ~ U(0.5,1),
/// beta3, beta4 ~ U(0.05,0.1), beta5..7 = 0, intercept 0.25, sigma 1. The
/// first four predictors form the active set the selectors should recover.
inline TrueModelSpec gen_true_model(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> big(0.5, 1.0);
  std::uniform_real_distribution<double> small(0.05, 0.1);
  TrueModelSpec tm;
  tm.beta = Vector::Zero(7);
  tm.beta(0) = big(rng);
  tm.beta(1) = big(rng);
  tm.beta(2) = small(rng);
  tm.beta(3) = small(rng);
  tm.active_set = {0, 1, 2, 3};
  return tm;
}

/// Noise-free conditional mean beta0 + X beta under the ground truth.
inline Vector true_mean(const Matrix& x, const TrueModelSpec& tm) {
  if (x.cols() < tm.beta.size())
    throw DimensionMismatchError("true_mean: X has fewer columns than beta");
  Vector mu = Vector::Constant(x.rows(), tm.beta0);
  mu.noalias() += x.leftCols(tm.beta.size()) * tm.beta;
  return mu;
}

/// Generates responses y = beta0 + X beta + eps with eps ~ N(0, sigma^2).
/// Returns (y, mu); the latent mu is what MSPE is judged against.
inline std::pair<Vector, Vector> gen_response(const Matrix& x,
                                              const TrueModelSpec& tm,
                                              std::uint64_t seed) {
  Vector mu = true_mean(x, tm);
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector y(x.rows());
  for (Index i = 0; i < x.rows(); ++i) y(i) = mu(i) + tm.sigma * gauss(rng);
  return {std::move(y), std::move(mu)};
}

}  // namespace aoss
