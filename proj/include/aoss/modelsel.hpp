#pragma once

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aoss/csv.hpp"
#include "aoss/error.hpp"
#include "aoss/linalg.hpp"
#include "aoss/preprocess.hpp"
#include "aoss/types.hpp"

namespace aoss {

/// A candidate model: the set of predictor column indices it uses (0-based,
/// kept sorted ascending). Empty only as the forward-selection start.
struct ModelId {
  std::vector<Index> predictors;

  bool operator==(const ModelId& o) const { return predictors == o.predictors; }
  Index size() const { return static_cast<Index>(predictors.size()); }

  /// Bit i set <=> column i included; stable across predictor orderings.
  std::uint64_t bitmask() const {
    std::uint64_t m = 0;
    for (Index j : predictors) m |= (1ULL << j);
    return m;
  }
  static ModelId from_bitmask(std::uint64_t m) {
    ModelId id;
    for (Index j = 0; m != 0; ++j, m >>= 1)
      if (m & 1ULL) id.predictors.push_back(j);
    return id;
  }

  /// Human-readable form using 1-based column numbers, e.g. "{1,3,4}".
  std::string to_string() const {
    std::string s = "{";
    for (std::size_t i = 0; i < predictors.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(predictors[i] + 1);
    }
    return s + "}";
  }
};

/// One fitted candidate model. `intercept` is filled by callers that know
/// the centering means (see adjusted_intercept); the fit itself has none.
struct FitResult {
  ModelId model;
  Vector beta;
  double intercept = 0.0;
  double rss = 0.0;
  double bic = 0.0;
  Index n_used = 0;
};

/// Everything a model search evaluated, plus the BIC winner.
struct CandidateSetReport {
  std::vector<FitResult> fits;
  ModelId selected;
  double selected_bic = std::numeric_limits<double>::infinity();
  int skipped_rank_deficient = 0;
  std::vector<ModelId> forward_path;  // accepted additions, forward search only
};

/// Least squares without intercept: beta = argmin ||y - Xr b||^2, plus the
/// attained residual sum of squares.
inline std::pair<Vector, double> ols_fit(const Matrix& xr, const Vector& y) {
  if (xr.rows() != y.size())
    throw DimensionMismatchError("ols_fit: X and y row counts differ");
  if (xr.rows() <= xr.cols())
    throw ValidationError("ols_fit: need rows > cols");
  Eigen::ColPivHouseholderQR<Matrix> qr(xr);
  const auto& rdiag = qr.matrixR().diagonal();
  const double rmax = std::abs(rdiag(0));
  const double rmin = std::abs(rdiag(rdiag.size() - 1));
  if (!(rmin > 0.0) || rmax >= kConditionLimit * rmin)
    throw RankDeficientError("ols_fit: design matrix numerically rank deficient");
  Vector beta = qr.solve(y);
  const double rss = (y - xr * beta).squaredNorm();
  return {std::move(beta), rss};
}

/// BIC = n log(rss/n) + p_r log(n), natural logs. An (essentially) perfect
/// fit returns -inf, which wins any comparison outright.
inline double bic_score(double rss, Index n, Index p_r) {
  if (n <= p_r || p_r < 0)
    throw ValidationError("bic_score: need n > p_r >= 0");
  if (rss < 0.0) throw ValidationError("bic_score: negative rss");
  if (rss <= 1e-300) return -std::numeric_limits<double>::infinity();
  const double nd = static_cast<double>(n);
  return nd * std::log(rss / nd) + static_cast<double>(p_r) * std::log(nd);
}

/// Intercept for prediction on the original scale after a centralized fit:
/// beta0 = y_mean - x_means . beta, with x_means restricted to the model.
inline double adjusted_intercept(double y_mean, const Vector& x_means,
                                 const Vector& beta) {
  if (x_means.size() != beta.size())
    throw DimensionMismatchError("adjusted_intercept: x_means/beta size mismatch");
  return y_mean - x_means.dot(beta);
}

namespace detail {

inline Matrix gather_columns(const Matrix& x, const std::vector<Index>& cols) {
  Matrix sub(x.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) sub.col(static_cast<Index>(j)) = x.col(cols[j]);
  return sub;
}

/// Ranks (bic, model): lower BIC first, then fewer parameters, then
/// lexicographically smaller predictor list.
inline bool better_model(double bic_a, const ModelId& a, double bic_b,
                         const ModelId& b) {
  if (bic_a != bic_b) return bic_a < bic_b;
  if (a.size() != b.size()) return a.size() < b.size();
  return a.predictors < b.predictors;
}

inline FitResult fit_candidate(const DataMatrix& d, ModelId model) {
  Matrix xr = gather_columns(d.X, model.predictors);
  auto [beta, rss] = ols_fit(xr, *d.y);
  FitResult f;
  f.n_used = d.rows();
  f.bic = bic_score(rss, f.n_used, model.size());
  f.model = std::move(model);
  f.beta = std::move(beta);
  f.rss = rss;
  return f;
}

}  // namespace detail

/// Evaluates every non-empty predictor subset (2^p - 1 models) by BIC.
/// Rank-deficient submodels are skipped and counted, not fitted.
/// The data are expected to come from centralized full data.
inline CandidateSetReport all_subset_bic(const DataMatrix& d) {
  const Index p = d.cols();
  if (p > 20)
    throw TooManyPredictorsError("all_subset_bic: p = " + std::to_string(p) +
                                 " exceeds the 2^p guard (20)");
  if (!d.y) throw ValidationError("all_subset_bic: dataset has no response");
  CandidateSetReport report;
  report.fits.reserve((1u << p) - 1);
  for (std::uint64_t mask = 1; mask < (1ULL << p); ++mask) {
    ModelId model = ModelId::from_bitmask(mask);
    try {
      FitResult f = detail::fit_candidate(d, std::move(model));
      if (detail::better_model(f.bic, f.model, report.selected_bic, report.selected)) {
        report.selected = f.model;
        report.selected_bic = f.bic;
      }
      report.fits.push_back(std::move(f));
    } catch (const RankDeficientError&) {
      ++report.skipped_rank_deficient;
    }
  }
  if (report.fits.empty())
    throw RankDeficientError("all_subset_bic: every candidate was rank deficient");
  return report;
}

/// Forward selection by BIC: starts from the empty model (rss = sum of
/// squared deviations from the mean, p_r = 0) and adds the best variable
/// until no addition lowers the BIC.
inline CandidateSetReport forward_bic(const DataMatrix& d) {
  if (!d.y) throw ValidationError("forward_bic: dataset has no response");
  const Index p = d.cols();
  const Index n = d.rows();
  if (n < 2) throw ValidationError("forward_bic: need at least 2 rows");

  CandidateSetReport report;
  const double ybar = d.y->mean();
  const double rss0 = (d.y->array() - ybar).matrix().squaredNorm();
  double current_bic = bic_score(rss0, n, 0);
  ModelId current;
  {
    FitResult empty;
    empty.rss = rss0;
    empty.bic = current_bic;
    empty.n_used = n;
    report.fits.push_back(std::move(empty));
  }

  std::vector<bool> used(p, false);
  while (true) {
    double best_bic = std::numeric_limits<double>::infinity();
    std::optional<FitResult> best;
    for (Index v = 0; v < p; ++v) {
      if (used[v]) continue;
      ModelId trial = current;
      trial.predictors.insert(
          std::upper_bound(trial.predictors.begin(), trial.predictors.end(), v), v);
      try {
        FitResult f = detail::fit_candidate(d, std::move(trial));
        if (!best || detail::better_model(f.bic, f.model, best_bic, best->model)) {
          best_bic = f.bic;
          best = f;
        }
        report.fits.push_back(std::move(f));
      } catch (const RankDeficientError&) {
        ++report.skipped_rank_deficient;
      }
    }
    if (!best) break;
    if (best_bic < current_bic) {
      current = best->model;
      current_bic = best_bic;
      for (Index v : current.predictors) used[v] = true;
      report.forward_path.push_back(current);
      if (current.size() == p) break;
    } else {
      break;
    }
  }
  report.selected = current;
  report.selected_bic = current_bic;
  return report;
}

/// The FitResult backing report.selected. Every search records the winning
/// fit (including the forward search's empty start), so this always finds it.
inline const FitResult& selected_fit(const CandidateSetReport& report) {
  for (const FitResult& f : report.fits)
    if (f.model == report.selected) return f;
  throw ValidationError("selected_fit: winner missing from the evaluated fits");
}

/// Audit CSV: one row per evaluated model (bitmask, p_r, rss, bic).
inline void write_report_csv(const std::string& path,
                             const CandidateSetReport& report) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << "bitmask,p_r,rss,bic\n";
  for (const FitResult& f : report.fits)
    out << f.model.bitmask() << ',' << f.model.size() << ','
        << format_double(f.rss) << ',' << format_double(f.bic) << '\n';
}

}  // namespace aoss
