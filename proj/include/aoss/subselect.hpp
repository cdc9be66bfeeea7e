#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "aoss/error.hpp"
#include "aoss/linalg.hpp"
#include "aoss/preprocess.hpp"
#include "aoss/rng.hpp"
#include "aoss/types.hpp"

namespace aoss {

/// Result of one subdata selection run. Indices refer to the ORIGINAL
/// (unscaled) dataset rows and are sorted ascending. The trajectory holds
/// the A-criterion trace after each greedy removal (strictly increasing);
/// removal_order lists the deleted rows in deletion order, as a diagnostic.
struct SelectionResult {
  std::vector<Index> indices;
  Algorithm algorithm = Algorithm::kLevss;
  std::vector<double> trace_trajectory;
  std::vector<Index> removal_order;
  double elapsed_seconds = 0.0;
};

/// The rows surviving the elimination step, ready for greedy pruning.
/// `q` holds the pooled rows (scaled per the [-1,1] convention), one per
/// pool index, in the same order as pool_indices.
struct EliminationPool {
  std::vector<Index> pool_indices;
  Matrix q;
};

/// Which removal-gain formula the second elimination step uses. The default
/// divides through the inverse Gram matrix; the alternate reproduces a
/// D^2 (uninverted) variant kept for side-by-side comparison runs.
enum class Alg2Gain { kInverseGram, kSquaredGram };

inline const char* to_string(Alg2Gain g) {
  return g == Alg2Gain::kInverseGram ? "inverse-gram" : "squared-gram";
}

inline Alg2Gain alg2_gain_from_string(const std::string& s) {
  if (s == "inverse-gram") return Alg2Gain::kInverseGram;
  if (s == "squared-gram") return Alg2Gain::kSquaredGram;
  throw ValidationError("unknown gain variant '" + s +
                        "' (expected inverse-gram or squared-gram)");
}

namespace detail {

inline Matrix gather_rows(const Matrix& x, const std::vector<Index>& rows) {
  Matrix sub(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) sub.row(static_cast<Index>(i)) = x.row(rows[i]);
  return sub;
}

/// Picks the `take` entries with the largest key; ties go to the lower id.
inline std::vector<Index> top_by_key(const Vector& keys,
                                     const std::vector<Index>& ids, Index take) {
  std::vector<Index> order(ids.size());
  std::iota(order.begin(), order.end(), Index{0});
  auto cmp = [&](Index a, Index b) {
    if (keys(a) != keys(b)) return keys(a) > keys(b);
    return ids[a] < ids[b];
  };
  std::nth_element(order.begin(), order.begin() + take, order.end(), cmp);
  std::vector<Index> out;
  out.reserve(take);
  for (Index i = 0; i < take; ++i) out.push_back(ids[order[i]]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Deterministic leverage-based selection: in each of T rounds, the thin SVD
/// of the not-yet-selected rows is taken and the ceil(m/T) rows of largest
/// leverage join the selection (the last round takes the remainder).
/// Returns m original row indices, ascending.
inline std::vector<Index> levss_select(const Matrix& x, Index m, int t_rounds) {
  const Index n = x.rows();
  if (m < 0 || m > n)
    throw ValidationError("levss_select: m must be in [0, n]");
  if (t_rounds < 1) throw ValidationError("levss_select: T >= 1 required");
  if (m == 0) return {};

  const Index per_round = (m + t_rounds - 1) / t_rounds;
  std::vector<Index> remaining(n);
  std::iota(remaining.begin(), remaining.end(), Index{0});
  std::vector<Index> selected;
  selected.reserve(m);

  while (static_cast<Index>(selected.size()) < m) {
    const Index need = std::min<Index>(per_round, m - static_cast<Index>(selected.size()));
    if (need >= static_cast<Index>(remaining.size())) {
      selected.insert(selected.end(), remaining.begin(), remaining.end());
      remaining.clear();
      break;
    }
    const Vector h = leverage_scores(thin_svd(detail::gather_rows(x, remaining)));
    std::vector<Index> chosen = detail::top_by_key(h, remaining, need);
    selected.insert(selected.end(), chosen.begin(), chosen.end());
    std::vector<Index> next;
    next.reserve(remaining.size() - chosen.size());
    std::set_difference(remaining.begin(), remaining.end(), chosen.begin(),
                        chosen.end(), std::back_inserter(next));
    remaining.swap(next);
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

/// Elimination step of the first algorithm: LEVSS targeting a pool of
/// ceil(pool_multiplier * k) rows. Should the leverage stage ever return
/// more rows than the target, a simple random subsample (seeded) trims it.
inline EliminationPool eliminate_alg1(const Matrix& x_scaled, Index k,
                                      int t_rounds, std::uint64_t rng_seed,
                                      double pool_multiplier = 2.0) {
  const Index n = x_scaled.rows();
  const Index p = x_scaled.cols();
  if (k <= p) throw ValidationError("eliminate_alg1: k > p required");
  const Index target = static_cast<Index>(std::ceil(pool_multiplier * static_cast<double>(k)));
  if (target > n)
    throw PoolTooSmallError("eliminate_alg1: need " + std::to_string(target) +
                            " pool rows but the data has only " + std::to_string(n));
  std::vector<Index> pool = levss_select(x_scaled, target, t_rounds);
  if (static_cast<Index>(pool.size()) > target) {
    std::vector<Index> trimmed;
    Rng rng(rng_seed);
    std::sample(pool.begin(), pool.end(), std::back_inserter(trimmed), target, rng);
    pool.swap(trimmed);
  }
  Matrix q = detail::gather_rows(x_scaled, pool);
  return EliminationPool{std::move(pool), std::move(q)};
}

/// Removal gains d_i = sum_j z_j^2 / (1 - h_i) for every row of the
/// decomposed matrix, with z = (X^T X)^-1 x_i evaluated through the SVD
/// factors (row u_i of U gives z = V D^-1 u_i, so sum z^2 = ||D^-1 u_i||^2).
/// Rows whose removal would be degenerate (h >= 1 - guard) get -inf so that
/// a largest-first ranking places them last.
inline Vector svd_removal_gains(const ThinSvd& svd,
                                Alg2Gain gain = Alg2Gain::kInverseGram) {
  const Index n = svd.U.rows();
  Vector d(n);
  const Vector scale = gain == Alg2Gain::kInverseGram
                           ? svd.D.cwiseInverse()
                           : Vector(svd.D.array().cube());
  for (Index i = 0; i < n; ++i) {
    const double h = svd.U.row(i).squaredNorm();
    if (h >= 1.0 - kDenominatorGuard) {
      d(i) = -std::numeric_limits<double>::infinity();
      continue;
    }
    d(i) = (svd.U.row(i).transpose().array() * scale.array()).matrix().squaredNorm() / (1.0 - h);
  }
  return d;
}

/// Elimination step of the second algorithm: keep the ceil(pool_multiplier*k)
/// rows with the largest removal gain d_i (ties to the lower row index).
inline EliminationPool eliminate_alg2(const Matrix& x_scaled, Index k,
                                      double pool_multiplier = 2.0,
                                      Alg2Gain gain = Alg2Gain::kInverseGram) {
  const Index n = x_scaled.rows();
  const Index p = x_scaled.cols();
  if (k <= p) throw ValidationError("eliminate_alg2: k > p required");
  const Index target = static_cast<Index>(std::ceil(pool_multiplier * static_cast<double>(k)));
  if (target > n)
    throw PoolTooSmallError("eliminate_alg2: need " + std::to_string(target) +
                            " pool rows but the data has only " + std::to_string(n));
  const ThinSvd svd = thin_svd(x_scaled);
  const Vector d = svd_removal_gains(svd, gain);
  std::vector<Index> ids(n);
  std::iota(ids.begin(), ids.end(), Index{0});
  std::vector<Index> pool = detail::top_by_key(d, ids, target);
  Matrix q = detail::gather_rows(x_scaled, pool);
  return EliminationPool{std::move(pool), std::move(q)};
}

/// Greedy A-optimal pruning: deletes pool rows one at a time, each time the
/// row whose Sherman-Morrison downdate yields the smallest trace (ties to
/// the lowest original index), until k rows survive. The chosen downdated
/// inverse carries over as the next iteration's state; every
/// kRefreshInterval deletions it is recomputed from the surviving rows.
inline SelectionResult greedy_a_prune(const EliminationPool& pool, Index k) {
  const auto t0 = std::chrono::steady_clock::now();
  const Index n0 = pool.q.rows();
  const Index p = pool.q.cols();
  if (k < 0 || n0 < k)
    throw ValidationError("greedy_a_prune: pool smaller than k");
  if (k <= p) throw ValidationError("greedy_a_prune: k > p required");

  SelectionResult result;
  if (n0 == k) {  // nothing to remove
    result.indices = pool.pool_indices;
    std::sort(result.indices.begin(), result.indices.end());
    return result;
  }

  // Candidates as columns for contiguous access in the scan.
  Matrix cand = pool.q.transpose();
  std::vector<Index> ids = pool.pool_indices;
  Index active = n0;

  InverseInfoState state = inverse_info(pool.q);
  Vector scores(n0);
  Matrix z_work(p, n0);
  result.trace_trajectory.reserve(n0 - k);
  result.removal_order.reserve(n0 - k);

  int downdates = 0;
  while (active > k) {
    removal_traces(state, cand, active, scores, z_work);
    Index best = -1;
    for (Index j = 0; j < active; ++j) {
      if (std::isinf(scores(j))) continue;
      if (best < 0 || scores(j) < scores(best) ||
          (scores(j) == scores(best) && ids[j] < ids[best]))
        best = j;
    }
    if (best < 0)
      throw AllRemovalsDegenerateError(
          "greedy_a_prune: every remaining removal would be singular");

    const RemovalScore chosen = removal_score(state, cand.col(best), best);
    state = apply_removal(state, chosen);
    result.trace_trajectory.push_back(state.trace);
    result.removal_order.push_back(ids[best]);

    cand.col(best).swap(cand.col(active - 1));
    std::swap(ids[best], ids[active - 1]);
    --active;

    if (++downdates % kRefreshInterval == 0 && active > p) {
      const Matrix gram = cand.leftCols(active) * cand.leftCols(active).transpose();
      state = inverse_info_from_gram(gram, active);
    }
  }

  result.indices.assign(ids.begin(), ids.begin() + active);
  std::sort(result.indices.begin(), result.indices.end());
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

/// End-to-end selection: scales X onto [-1,1] internally (so the result is
/// invariant to per-column affine transforms of the input) and dispatches to
/// the requested strategy. Returned indices refer to the original rows.
inline SelectionResult select_subdata(const DataMatrix& d, Index k,
                                      Algorithm algorithm, int t_rounds = 10,
                                      double pool_multiplier = 2.0,
                                      std::uint64_t rng_seed = 0,
                                      Alg2Gain alg2_gain = Alg2Gain::kInverseGram) {
  const auto t0 = std::chrono::steady_clock::now();
  const Index n = d.rows();
  const Index p = d.cols();
  if (k <= p)
    throw ValidationError("select_subdata: k (" + std::to_string(k) +
                          ") must exceed the number of predictors (" +
                          std::to_string(p) + ")");
  if (k > n) throw ValidationError("select_subdata: k exceeds the data size");
  if (pool_multiplier < 1.1)
    throw ValidationError("select_subdata: pool multiplier must be >= 1.1");

  const Matrix x_scaled = scale_to_unit_interval(d).first.X;

  SelectionResult result;
  switch (algorithm) {
    case Algorithm::kLevss:
      result.indices = levss_select(x_scaled, k, t_rounds);
      break;
    case Algorithm::kRandom: {
      std::vector<Index> all(n);
      std::iota(all.begin(), all.end(), Index{0});
      Rng rng(rng_seed);
      std::sample(all.begin(), all.end(), std::back_inserter(result.indices), k, rng);
      break;
    }
    case Algorithm::kAlg1: {
      EliminationPool pool = eliminate_alg1(x_scaled, k, t_rounds,
                                            derive_seed(rng_seed, "alg1-subsample"),
                                            pool_multiplier);
      result = greedy_a_prune(pool, k);
      break;
    }
    case Algorithm::kAlg2: {
      EliminationPool pool = eliminate_alg2(x_scaled, k, pool_multiplier, alg2_gain);
      result = greedy_a_prune(pool, k);
      break;
    }
  }
  result.algorithm = algorithm;
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

/// One selected original row index per line.
inline void write_indices_csv(const std::string& path, const SelectionResult& r) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  for (Index i : r.indices) out << i << '\n';
}

inline nlohmann::json selection_to_json(const SelectionResult& r) {
  return nlohmann::json{{"algorithm", to_string(r.algorithm)},
                        {"k", r.indices.size()},
                        {"elapsed_seconds", r.elapsed_seconds},
                        {"trace_trajectory", r.trace_trajectory},
                        {"indices", r.indices}};
}

}  // namespace aoss
