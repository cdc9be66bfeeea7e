#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "aoss/preprocess.hpp"
#include "aoss/subselect.hpp"
#include "oracles.hpp"

using aoss::Algorithm;
using aoss::EliminationPool;
using aoss::Index;
using aoss::Matrix;
using aoss::Vector;

namespace {

/// Independent multi-round largest-leverage selection: re-derives leverages
/// from the explicit hat matrix each round.
std::vector<Index> levss_reference(const Matrix& x, Index m, int t_rounds) {
  const Index per_round = (m + t_rounds - 1) / t_rounds;
  std::vector<Index> remaining(x.rows());
  std::iota(remaining.begin(), remaining.end(), Index{0});
  std::vector<Index> selected;
  while (static_cast<Index>(selected.size()) < m) {
    const Index need =
        std::min<Index>(per_round, m - static_cast<Index>(selected.size()));
    if (need >= static_cast<Index>(remaining.size())) {
      selected.insert(selected.end(), remaining.begin(), remaining.end());
      break;
    }
    const Vector h = oracle::hat_diagonal(oracle::take_rows(x, remaining));
    std::vector<std::size_t> order(remaining.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (h(static_cast<Index>(a)) != h(static_cast<Index>(b)))
        return h(static_cast<Index>(a)) > h(static_cast<Index>(b));
      return remaining[a] < remaining[b];
    });
    std::vector<Index> chosen;
    for (Index i = 0; i < need; ++i) chosen.push_back(remaining[order[i]]);
    std::sort(chosen.begin(), chosen.end());
    std::vector<Index> next;
    std::set_difference(remaining.begin(), remaining.end(), chosen.begin(),
                        chosen.end(), std::back_inserter(next));
    selected.insert(selected.end(), chosen.begin(), chosen.end());
    remaining.swap(next);
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

bool sorted_unique(const std::vector<Index>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] <= v[i - 1]) return false;
  return true;
}

}  // namespace

TEST_CASE("single-round leverage selection picks the top leverages", "[subselect]") {
  const Matrix x = oracle::random_matrix(60, 4, 17);
  const std::vector<Index> picked = aoss::levss_select(x, 12, 1);
  REQUIRE(picked.size() == 12);
  REQUIRE(sorted_unique(picked));

  const Vector h = oracle::hat_diagonal(x);
  std::vector<Index> order(60);
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (h(a) != h(b)) return h(a) > h(b);
    return a < b;
  });
  std::vector<Index> expect(order.begin(), order.begin() + 12);
  std::sort(expect.begin(), expect.end());
  REQUIRE(picked == expect);
}

TEST_CASE("multi-round leverage selection matches the reference replay", "[subselect]") {
  const Matrix x = oracle::random_matrix(80, 3, 23);
  for (int t : {2, 3, 10}) {
    const std::vector<Index> got = aoss::levss_select(x, 25, t);
    REQUIRE(got == levss_reference(x, 25, t));
  }
  // Rounds matter: one round and several rounds disagree on this data.
  REQUIRE(aoss::levss_select(x, 25, 1) != aoss::levss_select(x, 25, 10));
}

TEST_CASE("leverage selection edge cases", "[subselect]") {
  const Matrix x = oracle::random_matrix(10, 2, 5);
  REQUIRE(aoss::levss_select(x, 0, 3).empty());
  std::vector<Index> all = aoss::levss_select(x, 10, 3);
  REQUIRE(all.size() == 10);
  REQUIRE(sorted_unique(all));
  REQUIRE_THROWS_AS(aoss::levss_select(x, 11, 3), aoss::ValidationError);
  REQUIRE_THROWS_AS(aoss::levss_select(x, 5, 0), aoss::ValidationError);
}

TEST_CASE("worked greedy example removes the tied low-index row", "[subselect]") {
  EliminationPool pool;
  pool.pool_indices = {0, 1, 2, 3};
  pool.q.resize(4, 2);
  pool.q << 1, 0, 0, 1, 1, 1, -1, 1;

  // Scores: rows 0,1 -> 5/6 (tie), rows 2,3 -> 4/3; lowest index wins.
  const aoss::SelectionResult r = aoss::greedy_a_prune(pool, 3);
  REQUIRE(r.indices == std::vector<Index>{1, 2, 3});
  REQUIRE(r.removal_order == std::vector<Index>{0});
  REQUIRE(r.trace_trajectory.size() == 1);
  REQUIRE(r.trace_trajectory[0] == Catch::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("every greedy removal matches the brute-force argmin", "[subselect]") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Index p = 2 + static_cast<Index>(rng() % 4);
    const Index rows = p + 4 + static_cast<Index>(rng() % 20);
    const Index k = p + 1 + static_cast<Index>(rng() % (rows - p - 1));

    EliminationPool pool;
    pool.q = oracle::random_matrix(rows, p, rng());
    pool.pool_indices.resize(rows);
    std::iota(pool.pool_indices.begin(), pool.pool_indices.end(), Index{0});

    const aoss::SelectionResult r = aoss::greedy_a_prune(pool, k);
    REQUIRE(static_cast<Index>(r.indices.size()) == k);

    // Replay the deletions against from-scratch re-inversion.
    Matrix surviving = pool.q;
    std::vector<Index> ids = pool.pool_indices;
    for (Index victim : r.removal_order) {
      REQUIRE(victim == oracle::best_single_removal(surviving, ids));
      const auto pos = std::find(ids.begin(), ids.end(), victim) - ids.begin();
      surviving = oracle::drop_row(surviving, pos);
      ids.erase(ids.begin() + pos);
    }
    std::sort(ids.begin(), ids.end());
    REQUIRE(ids == r.indices);
  }
}

TEST_CASE("greedy pruning bookkeeping", "[subselect]") {
  EliminationPool pool;
  pool.q = oracle::random_matrix(40, 3, 7);
  pool.pool_indices.resize(40);
  std::iota(pool.pool_indices.begin(), pool.pool_indices.end(), Index{0});

  const aoss::SelectionResult r = aoss::greedy_a_prune(pool, 10);
  REQUIRE(r.indices.size() == 10);
  REQUIRE(r.removal_order.size() == 30);
  REQUIRE(r.trace_trajectory.size() == 30);
  for (std::size_t i = 1; i < r.trace_trajectory.size(); ++i)
    REQUIRE(r.trace_trajectory[i] > r.trace_trajectory[i - 1]);

  // Removed and surviving rows partition the pool.
  std::vector<Index> together = r.indices;
  together.insert(together.end(), r.removal_order.begin(), r.removal_order.end());
  std::sort(together.begin(), together.end());
  REQUIRE(together == pool.pool_indices);

  // Identity case: nothing to remove.
  const aoss::SelectionResult same = aoss::greedy_a_prune(pool, 40);
  REQUIRE(same.indices == pool.pool_indices);
  REQUIRE(same.trace_trajectory.empty());

  REQUIRE_THROWS_AS(aoss::greedy_a_prune(pool, 41), aoss::ValidationError);
  REQUIRE_THROWS_AS(aoss::greedy_a_prune(pool, 3), aoss::ValidationError);
}

TEST_CASE("first elimination stage is leverage selection on a doubled pool", "[subselect]") {
  const Matrix x = oracle::random_matrix(100, 3, 3);
  const EliminationPool pool = aoss::eliminate_alg1(x, 20, 10, 555);
  REQUIRE(pool.pool_indices.size() == 40);  // ceil(2.0 * k)
  REQUIRE(sorted_unique(pool.pool_indices));
  REQUIRE(pool.pool_indices == aoss::levss_select(x, 40, 10));
  REQUIRE(pool.q.rows() == 40);
  for (std::size_t i = 0; i < pool.pool_indices.size(); ++i)
    REQUIRE((pool.q.row(static_cast<Index>(i)) - x.row(pool.pool_indices[i]))
                .cwiseAbs()
                .maxCoeff() == 0.0);

  REQUIRE(aoss::eliminate_alg1(x, 20, 10, 555, 2.5).pool_indices.size() == 50);
  REQUIRE_THROWS_AS(aoss::eliminate_alg1(x, 60, 10, 1), aoss::PoolTooSmallError);
  REQUIRE_THROWS_AS(aoss::eliminate_alg1(x, 3, 10, 1), aoss::ValidationError);
}

TEST_CASE("second elimination stage keeps the largest removal gains", "[subselect]") {
  const Matrix x = oracle::random_matrix(100, 3, 13);
  const EliminationPool pool = aoss::eliminate_alg2(x, 20);
  REQUIRE(pool.pool_indices.size() == 40);
  REQUIRE(sorted_unique(pool.pool_indices));

  // Oracle gains: z = (X^T X)^{-1} x_i through an explicit inverse.
  const Matrix inv = oracle::inverse_gram(x);
  const Vector h = oracle::hat_diagonal(x);
  std::vector<Index> order(100);
  std::iota(order.begin(), order.end(), Index{0});
  std::vector<double> gain(100);
  for (Index i = 0; i < 100; ++i)
    gain[i] = (inv * x.row(i).transpose()).squaredNorm() / (1.0 - h(i));
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (gain[a] != gain[b]) return gain[a] > gain[b];
    return a < b;
  });
  std::vector<Index> expect(order.begin(), order.begin() + 40);
  std::sort(expect.begin(), expect.end());
  REQUIRE(pool.pool_indices == expect);

  REQUIRE_THROWS_AS(aoss::eliminate_alg2(x, 60), aoss::PoolTooSmallError);
}

TEST_CASE("squared-gram gain variant ranks by its own formula", "[subselect]") {
  const Matrix x = oracle::random_matrix(60, 3, 29);
  const EliminationPool pool =
      aoss::eliminate_alg2(x, 10, 2.0, aoss::Alg2Gain::kSquaredGram);

  const Matrix gram = x.transpose() * x;
  const Vector h = oracle::hat_diagonal(x);
  std::vector<double> gain(60);
  for (Index i = 0; i < 60; ++i)
    gain[i] = (gram * x.row(i).transpose()).squaredNorm() / (1.0 - h(i));
  std::vector<Index> order(60);
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (gain[a] != gain[b]) return gain[a] > gain[b];
    return a < b;
  });
  std::vector<Index> expect(order.begin(), order.begin() + 20);
  std::sort(expect.begin(), expect.end());
  REQUIRE(pool.pool_indices == expect);

  // The two variants rank this data differently.
  REQUIRE(pool.pool_indices != aoss::eliminate_alg2(x, 10).pool_indices);
}

TEST_CASE("degenerate rows rank last in the gain ordering", "[subselect]") {
  Matrix x(5, 1);
  x << 1e6, 1, 1, 1, 1;  // the huge row has leverage ~ 1
  const Vector gains = aoss::svd_removal_gains(aoss::thin_svd(x));
  REQUIRE(std::isinf(gains(0)));
  REQUIRE(gains(0) < 0.0);
  for (Index i = 1; i < 5; ++i) REQUIRE(std::isfinite(gains(i)));

  const EliminationPool pool = aoss::eliminate_alg2(x, 2);
  REQUIRE(pool.pool_indices == std::vector<Index>{1, 2, 3, 4});
}

TEST_CASE("end-to-end selection validates its inputs", "[subselect]") {
  aoss::DataMatrix d;
  d.X = oracle::random_matrix(200, 4, 41);
  REQUIRE_THROWS_AS(aoss::select_subdata(d, 4, Algorithm::kAlg1),
                    aoss::ValidationError);
  REQUIRE_THROWS_AS(aoss::select_subdata(d, 201, Algorithm::kLevss),
                    aoss::ValidationError);
  REQUIRE_THROWS_AS(aoss::select_subdata(d, 20, Algorithm::kAlg1, 10, 1.05),
                    aoss::ValidationError);

  for (Algorithm a : {Algorithm::kLevss, Algorithm::kAlg1, Algorithm::kAlg2,
                      Algorithm::kRandom}) {
    const aoss::SelectionResult r = aoss::select_subdata(d, 20, a, 10, 2.0, 77);
    REQUIRE(r.indices.size() == 20);
    REQUIRE(sorted_unique(r.indices));
    REQUIRE(r.indices.front() >= 0);
    REQUIRE(r.indices.back() < 200);
    REQUIRE(r.algorithm == a);
    REQUIRE(r.elapsed_seconds >= 0.0);
  }
}

TEST_CASE("selection only sees the shape of the data, not its units", "[subselect]") {
  aoss::DataMatrix d;
  d.X = oracle::random_matrix(300, 4, 83);
  aoss::DataMatrix rescaled = d;
  const double scale[4] = {1000.0, 0.001, 42.0, -3.0};  // includes a sign flip
  const double shift[4] = {-7.0, 300.0, 0.5, 12.0};
  for (Index j = 0; j < 4; ++j)
    rescaled.X.col(j) = (d.X.col(j).array() * scale[j] + shift[j]).matrix();

  for (Algorithm a : {Algorithm::kLevss, Algorithm::kAlg1, Algorithm::kAlg2}) {
    const auto base = aoss::select_subdata(d, 30, a, 10, 2.0, 5);
    const auto moved = aoss::select_subdata(rescaled, 30, a, 10, 2.0, 5);
    REQUIRE(base.indices == moved.indices);
  }
}

TEST_CASE("pruned selections stay inside their elimination pool", "[subselect]") {
  aoss::DataMatrix d;
  d.X = oracle::random_matrix(250, 4, 59);
  const Matrix x_scaled = aoss::scale_to_unit_interval(d).first.X;

  const auto sel1 = aoss::select_subdata(d, 25, Algorithm::kAlg1, 10, 2.0, 3);
  const std::vector<Index> pool1 = aoss::levss_select(x_scaled, 50, 10);
  REQUIRE(std::includes(pool1.begin(), pool1.end(), sel1.indices.begin(),
                        sel1.indices.end()));

  const auto sel2 = aoss::select_subdata(d, 25, Algorithm::kAlg2, 10, 2.0, 3);
  const auto pool2 = aoss::eliminate_alg2(x_scaled, 25).pool_indices;
  REQUIRE(std::includes(pool2.begin(), pool2.end(), sel2.indices.begin(),
                        sel2.indices.end()));

  REQUIRE(sel1.trace_trajectory.size() == 25);  // pool 2k shrinks to k
  REQUIRE(sel2.trace_trajectory.size() == 25);
}

TEST_CASE("random selection is seeded sampling without replacement", "[subselect]") {
  aoss::DataMatrix d;
  d.X = oracle::random_matrix(500, 3, 11);
  const auto a = aoss::select_subdata(d, 40, Algorithm::kRandom, 10, 2.0, 1);
  const auto b = aoss::select_subdata(d, 40, Algorithm::kRandom, 10, 2.0, 1);
  const auto c = aoss::select_subdata(d, 40, Algorithm::kRandom, 10, 2.0, 2);
  REQUIRE(a.indices == b.indices);
  REQUIRE(a.indices != c.indices);
  REQUIRE(sorted_unique(a.indices));
}

TEST_CASE("A-optimal selections gravitate to the periphery", "[subselect]") {
  aoss::DataMatrix d;
  d.X = oracle::random_matrix(2000, 2, 67);
  const double overall = d.X.rowwise().squaredNorm().mean();
  for (Algorithm a : {Algorithm::kAlg1, Algorithm::kAlg2}) {
    const auto sel = aoss::select_subdata(d, 100, a, 10, 2.0, 9);
    double chosen = 0.0;
    for (Index i : sel.indices) chosen += d.X.row(i).squaredNorm();
    chosen /= static_cast<double>(sel.indices.size());
    REQUIRE(chosen > 2.0 * overall);
  }
}

TEST_CASE("selection artifacts serialize faithfully", "[subselect]") {
  aoss::DataMatrix d;
  d.X = oracle::random_matrix(100, 3, 15);
  const auto sel = aoss::select_subdata(d, 12, Algorithm::kAlg2, 10, 2.0, 4);

  const nlohmann::json j = aoss::selection_to_json(sel);
  REQUIRE(j.at("algorithm") == "alg2");
  REQUIRE(j.at("k") == 12);
  REQUIRE(j.at("indices").size() == 12);
  REQUIRE(j.at("trace_trajectory").size() == sel.trace_trajectory.size());

  const std::string path =
      (std::filesystem::temp_directory_path() / "aoss_sel_idx.csv").string();
  aoss::write_indices_csv(path, sel);
  std::ifstream in(path);
  std::string line;
  std::vector<Index> read_back;
  while (std::getline(in, line))
    if (!line.empty()) read_back.push_back(std::stoll(line));
  std::filesystem::remove(path);
  REQUIRE(read_back == sel.indices);
}
