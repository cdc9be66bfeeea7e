#include <cmath>
#include <limits>

#include <catch2/catch_amalgamated.hpp>

#include "aoss/linalg.hpp"
#include "oracles.hpp"

using aoss::Index;
using aoss::Matrix;
using aoss::Vector;

TEST_CASE("thin SVD reconstructs the input and is orthonormal", "[linalg]") {
  const Matrix x = oracle::random_matrix(20, 4, 101);
  const aoss::ThinSvd svd = aoss::thin_svd(x);
  REQUIRE((svd.U * svd.D.asDiagonal() * svd.V.transpose() - x).norm() <
          1e-12 * x.norm());
  REQUIRE((svd.U.transpose() * svd.U - Matrix::Identity(4, 4)).norm() < 1e-12);
  REQUIRE((svd.V.transpose() * svd.V - Matrix::Identity(4, 4)).norm() < 1e-12);
  REQUIRE(svd.D.minCoeff() > 0.0);
}

TEST_CASE("thin SVD rejects short and rank-deficient matrices", "[linalg]") {
  REQUIRE_THROWS_AS(aoss::thin_svd(oracle::random_matrix(3, 5, 7)),
                    aoss::ValidationError);
  Matrix x = oracle::random_matrix(30, 4, 8);
  x.col(3) = 2.0 * x.col(0);  // exact linear dependence
  REQUIRE_THROWS_AS(aoss::thin_svd(x), aoss::RankDeficientError);
}

TEST_CASE("leverage scores equal the hat-matrix diagonal", "[linalg]") {
  const Matrix x = oracle::random_matrix(30, 5, 92);
  const Vector h = aoss::leverage_scores(aoss::thin_svd(x));
  const Vector href = oracle::hat_diagonal(x);
  REQUIRE((h - href).cwiseAbs().maxCoeff() < 1e-10);
  REQUIRE(std::abs(h.sum() - 5.0) < 1e-10);  // traces of projections
  REQUIRE(h.minCoeff() > 0.0);
  REQUIRE(h.maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("inverse information matches a full-pivot inverse", "[linalg]") {
  const Matrix q = oracle::random_matrix(40, 6, 17);
  const aoss::InverseInfoState state = aoss::inverse_info(q);
  const Matrix ref = oracle::inverse_gram(q);
  REQUIRE((state.inv - ref).norm() < 1e-10 * ref.norm());
  REQUIRE(state.trace == Catch::Approx(ref.trace()).epsilon(1e-12));
  REQUIRE(state.n_rows == 40);
  REQUIRE((state.inv - state.inv.transpose()).norm() == 0.0);  // symmetrized
}

TEST_CASE("inverse information refuses singular designs", "[linalg]") {
  Matrix q = oracle::random_matrix(12, 3, 3);
  q.col(2) = q.col(0) - q.col(1);
  REQUIRE_THROWS_AS(aoss::inverse_info(q), aoss::SingularInformationError);
}

TEST_CASE("worked 3x2 example: inverse, leverage and removal", "[linalg]") {
  Matrix q(3, 2);
  q << 1, 0, 0, 1, 1, 1;
  const aoss::InverseInfoState state = aoss::inverse_info(q);

  Matrix expected_inv(2, 2);
  expected_inv << 2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0;
  REQUIRE((state.inv - expected_inv).cwiseAbs().maxCoeff() < 1e-14);
  REQUIRE(state.trace == Catch::Approx(4.0 / 3.0).epsilon(1e-14));

  // Dropping the (1,1) row leaves the identity design.
  Vector x(2);
  x << 1, 1;
  const aoss::RemovalScore score = aoss::removal_score(state, x, 2);
  REQUIRE(score.score == Catch::Approx(2.0).epsilon(1e-14));
  REQUIRE((score.downdated_inv - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <
          1e-14);

  const aoss::InverseInfoState after = aoss::apply_removal(state, score);
  REQUIRE(after.trace == Catch::Approx(2.0).epsilon(1e-14));
  REQUIRE(after.n_rows == 2);
}

TEST_CASE("removal scores match direct re-inversion", "[linalg]") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    const Index rows = 10 + static_cast<Index>(rng() % 40);
    const Index cols = 2 + static_cast<Index>(rng() % 5);
    const Matrix x = oracle::random_matrix(rows, cols, rng());
    const aoss::InverseInfoState state = aoss::inverse_info(x);
    const Index victim = static_cast<Index>(rng() % static_cast<std::uint64_t>(rows));

    const aoss::RemovalScore score = aoss::removal_score(state, x.row(victim), victim);
    const Matrix ref = oracle::inverse_gram(oracle::drop_row(x, victim));
    REQUIRE((score.downdated_inv - ref).norm() < 1e-8 * ref.norm());
    REQUIRE(score.score == Catch::Approx(ref.trace()).epsilon(1e-8));
    REQUIRE(score.score > state.trace);  // deletions never improve the trace
  }
}

TEST_CASE("removing a zero row leaves the trace unchanged", "[linalg]") {
  Matrix x = oracle::random_matrix(10, 3, 5);
  x.row(4).setZero();
  const aoss::InverseInfoState state = aoss::inverse_info(x);
  const aoss::RemovalScore score = aoss::removal_score(state, x.row(4), 4);
  REQUIRE(score.score == Catch::Approx(state.trace).epsilon(1e-14));
}

TEST_CASE("degenerate removal is refused", "[linalg]") {
  // Dropping row 0 leaves both remaining rows on the second axis.
  Matrix x(3, 2);
  x << 1, 0, 0, 1, 0, 2;
  const aoss::InverseInfoState state = aoss::inverse_info(x);
  REQUIRE_THROWS_AS(aoss::removal_score(state, x.row(0), 0),
                    aoss::DegenerateRemovalError);
}

TEST_CASE("batched removal traces agree with one-at-a-time scoring", "[linalg]") {
  Matrix x(6, 2);
  x << 1, 0, 0, 1, 0, 2, 3, 1, -2, 2, 0.5, 0.5;
  const aoss::InverseInfoState state = aoss::inverse_info(x);

  const Matrix cand = x.transpose();
  Vector scores(6);
  Matrix z_work(2, 6);
  aoss::removal_traces(state, cand, 6, scores, z_work);

  for (Index i = 0; i < 6; ++i) {
    Vector z_buf(2);
    const double one = aoss::removal_trace(state, x.row(i), z_buf);
    if (std::isinf(one)) {
      REQUIRE(std::isinf(scores(i)));
    } else {
      REQUIRE(scores(i) == Catch::Approx(one).epsilon(1e-13));
    }
  }
}

TEST_CASE("long downdate chains stay close to scratch inversion", "[linalg]") {
  const Matrix x = oracle::random_matrix(240, 5, 2024);
  aoss::InverseInfoState state = aoss::inverse_info(x);
  Matrix remaining = x;
  std::mt19937_64 rng(99);
  for (int step = 0; step < 200; ++step) {
    const Index victim =
        static_cast<Index>(rng() % static_cast<std::uint64_t>(remaining.rows()));
    const aoss::RemovalScore score =
        aoss::removal_score(state, remaining.row(victim), victim);
    state = aoss::apply_removal(state, score);
    remaining = oracle::drop_row(remaining, victim);
  }
  const Matrix ref = oracle::inverse_gram(remaining);
  REQUIRE((state.inv - ref).norm() < 1e-8 * ref.norm());
  REQUIRE(state.n_rows == 40);
}
