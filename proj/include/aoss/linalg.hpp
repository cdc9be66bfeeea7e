#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

#include "aoss/error.hpp"
#include "aoss/types.hpp"

namespace aoss {

/// Relative singular-value cutoff below which a matrix counts as rank deficient.
inline constexpr double kRankTolerance = 1e-10;

/// Condition-number limit for inverting an information matrix.
inline constexpr double kConditionLimit = 1e12;

/// Guard on the Sherman-Morrison denominator: a removal needs 1 - h >= this.
inline constexpr double kDenominatorGuard = 1e-10;

/// Downdates between from-scratch re-inversions of the surviving rows.
inline constexpr int kRefreshInterval = 128;

/// Thin singular value decomposition X = U * diag(D) * V^T with U n-by-p
/// column-orthonormal, D descending and V p-by-p orthogonal.
struct ThinSvd {
  Matrix U;
  Vector D;
  Matrix V;
};

/// The running inverse information matrix (Q^T Q)^-1 of the current subdata,
/// its trace (the A-criterion value) and the number of rows still in Q.
struct InverseInfoState {
  Matrix inv;
  double trace = 0.0;
  Index n_rows = 0;
};

/// Outcome of scoring one candidate row for removal: the trace the state
/// would have after deleting the row, and the downdated inverse itself.
struct RemovalScore {
  Index row_index = -1;
  double score = 0.0;
  Matrix downdated_inv;
};

/// Gram eigenvalue ratio below which thin_svd abandons its fast path: at
/// squared precision the Gram route can neither certify ranks near
/// kRankTolerance nor keep its factors accurate.
inline constexpr double kGramSpectrumCutoff = 1e-8;

inline ThinSvd thin_svd(const Matrix& x) {
  if (x.rows() < x.cols())
    throw ValidationError("thin_svd: need rows >= cols, got " +
                          std::to_string(x.rows()) + "x" + std::to_string(x.cols()));

  // Fast path for the tall-skinny matrices this library lives on: the
  // factors follow from the p-by-p Gram eigendecomposition after one BLAS-3
  // pass over X, an order of magnitude cheaper than bidiagonalizing X.
  const Matrix gram = x.transpose() * x;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (gram + gram.transpose()));
  const Vector& w = eig.eigenvalues();  // ascending
  if (w(0) > kGramSpectrumCutoff * w(w.size() - 1)) {
    ThinSvd out;
    out.D = w.reverse().cwiseSqrt();
    out.V = eig.eigenvectors().rowwise().reverse();
    out.U.noalias() = x * out.V;
    out.U = out.U * out.D.cwiseInverse().asDiagonal();
    return out;
  }

  // Spectrum too collapsed to judge at squared precision: let the robust
  // bidiagonal SVD settle whether the matrix clears the rank tolerance.
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& d = svd.singularValues();
  if (d(d.size() - 1) <= kRankTolerance * d(0))
    throw RankDeficientError("thin_svd: smallest singular value " +
                             std::to_string(d(d.size() - 1)) +
                             " below rank tolerance");
  return ThinSvd{svd.matrixU(), d, svd.matrixV()};
}

/// Leverage scores h_i = ||row i of U||^2, the diagonal of the hat matrix.
inline Vector leverage_scores(const ThinSvd& svd) {
  return svd.U.rowwise().squaredNorm();
}

/// Inverts a symmetric positive definite Gram matrix by eigendecomposition,
/// rejecting matrices with condition number >= kConditionLimit.
inline InverseInfoState inverse_info_from_gram(const Matrix& gram, Index n_rows) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (gram + gram.transpose()));
  const Vector& w = eig.eigenvalues();  // ascending
  const double wmin = w(0);
  const double wmax = w(w.size() - 1);
  if (!(wmin > 0.0) || wmax >= kConditionLimit * wmin)
    throw SingularInformationError(
        "information matrix numerically singular (eigenvalues in [" +
        std::to_string(wmin) + ", " + std::to_string(wmax) + "])");
  InverseInfoState s;
  s.inv = eig.eigenvectors() * w.cwiseInverse().asDiagonal() *
          eig.eigenvectors().transpose();
  s.inv = 0.5 * (s.inv + s.inv.transpose()).eval();
  s.trace = s.inv.trace();
  s.n_rows = n_rows;
  return s;
}

/// Builds (Q^T Q)^-1 with its trace for a row matrix Q.
inline InverseInfoState inverse_info(const Matrix& q) {
  if (q.rows() <= q.cols())
    throw ValidationError("inverse_info: need rows > cols, got " +
                          std::to_string(q.rows()) + "x" + std::to_string(q.cols()));
  return inverse_info_from_gram(q.transpose() * q, q.rows());
}

/// Trace-only Sherman-Morrison downdate (the s_i score). Returns +inf when
/// the removal would make the information matrix singular, so callers can
/// skip such rows without exception traffic in hot loops.
inline double removal_trace(const InverseInfoState& state,
                            const Eigen::Ref<const Vector>& x, Vector& z_buf) {
  z_buf.noalias() = state.inv * x;
  const double h = x.dot(z_buf);
  if (h >= 1.0 - kDenominatorGuard)
    return std::numeric_limits<double>::infinity();
  return state.trace + z_buf.squaredNorm() / (1.0 - h);
}

/// Scores deleting row x from the current subdata: the downdated inverse
/// (Sherman-Morrison) and its trace. The score exceeds state.trace for every
/// nonzero x; equality holds only for x = 0.
inline RemovalScore removal_score(const InverseInfoState& state,
                                  const Eigen::Ref<const Vector>& x,
                                  Index row_index = -1) {
  Vector z = state.inv * x;
  const double h = x.dot(z);
  if (h >= 1.0 - kDenominatorGuard)
    throw DegenerateRemovalError(
        "removal would leave a singular information matrix (h = " +
        std::to_string(h) + ")");
  const double denom = 1.0 - h;
  RemovalScore r;
  r.row_index = row_index;
  r.score = state.trace + z.squaredNorm() / denom;
  r.downdated_inv = state.inv + (z * z.transpose()) / denom;
  return r;
}

/// Commits a scored removal: the chosen downdated inverse becomes the new
/// state (symmetrized to suppress rounding skew) and the row count drops.
inline InverseInfoState apply_removal(const InverseInfoState& state,
                                      const RemovalScore& chosen) {
  InverseInfoState next;
  next.inv = 0.5 * (chosen.downdated_inv + chosen.downdated_inv.transpose());
  next.trace = chosen.score;
  next.n_rows = state.n_rows - 1;
  return next;
}

/// Batched form of removal_trace for the greedy scan: candidate rows are the
/// first `m` columns of `cands` (p-by-N storage); scores land in `scores`
/// with +inf marking degenerate removals. `z_work` is caller-owned scratch.
inline void removal_traces(const InverseInfoState& state, const Matrix& cands,
                           Index m, Vector& scores, Matrix& z_work) {
  z_work.leftCols(m).noalias() = state.inv * cands.leftCols(m);
  for (Index j = 0; j < m; ++j) {
    const double h = cands.col(j).dot(z_work.col(j));
    if (h >= 1.0 - kDenominatorGuard) {
      scores(j) = std::numeric_limits<double>::infinity();
    } else {
      scores(j) = state.trace + z_work.col(j).squaredNorm() / (1.0 - h);
    }
  }
}

}  // namespace aoss
