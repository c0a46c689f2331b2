#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <array>
#include <cstdint>

#include "spdpool/random_matrix.hpp"
#include "spdpool/rng.hpp"
#include "spdpool/stiefel.hpp"
#include "spdpool/types.hpp"
#include "support/checks.hpp"
#include "support/generators.hpp"

using namespace spdpool;
using namespace testsupport;

namespace {

/// Independent reference for the generator's mixing function.
std::uint64_t mix_reference(std::uint64_t seed, std::uint64_t draw_index) {
  std::uint64_t z = seed + draw_index * 0x9E3779B97F4B7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

TEST_CASE("generator output matches the counter-indexed reference") {
  CounterRng rng(0xDEADBEEF);
  for (std::uint64_t i = 1; i <= 1000; ++i) {
    CHECK(rng.next_u64() == mix_reference(0xDEADBEEF, i));
  }
}

TEST_CASE("generator restarts exactly from a saved counter") {
  CounterRng a(42);
  for (int i = 0; i < 17; ++i) a.next_gaussian();
  const std::uint64_t saved = a.counter();
  const double next = a.next_gaussian();
  CounterRng b(42, saved);
  CHECK(b.next_gaussian() == next);
}

TEST_CASE("unit draws live in the half-open interval") {
  CounterRng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_unit();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
}

TEST_CASE("bounded draws stay below the bound") {
  CounterRng rng(11);
  for (int i = 0; i < 10000; ++i) {
    CHECK(rng.next_below(13) < 13);
  }
  // All residues appear over a long run.
  CounterRng rng2(12);
  std::array<int, 5> seen{};
  for (int i = 0; i < 1000; ++i) seen[rng2.next_below(5)]++;
  for (int count : seen) CHECK(count > 100);
}

TEST_CASE("gaussian draws have unit scale statistics") {
  CounterRng rng(13);
  const int n = 100000;
  double sum = 0.0;
  double sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.next_gaussian();
    sum += g;
    sumsq += g * g;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.02);
  // Two draws consumed per deviate keeps the counter stride fixed.
  CHECK(rng.counter() == 2 * static_cast<std::uint64_t>(n));
}

TEST_CASE("orthonormalization produces orthonormal columns deterministically") {
  CounterRng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index rows = 3 + static_cast<Eigen::Index>(rng.next_below(8));
    const Eigen::Index cols = 1 + static_cast<Eigen::Index>(rng.next_below(rows));
    const Eigen::MatrixXd m = random_matrix(rng, rows, cols);
    const Eigen::MatrixXd q = orthonormal_columns(m);
    CHECK(max_abs_diff(q.transpose() * q, Eigen::MatrixXd::Identity(cols, cols)) <
          1e-13);
    CHECK(bitwise_equal(q, orthonormal_columns(m)));
  }
}

TEST_CASE("orthonormalizing an orthonormal basis returns it unchanged") {
  CounterRng rng(19);
  const Eigen::MatrixXd q = random_orthogonal(rng, 6).leftCols(4);
  CHECK(max_abs_diff(orthonormal_columns(q), q) < 1e-13);
}

TEST_CASE("orthonormalization rejects rank-deficient input") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 2);
  m.col(0).setOnes();
  m.col(1).setOnes();  // duplicate direction collapses the second column
  CHECK_THROWS_AS(orthonormal_columns(m), NumericalError);
}

TEST_CASE("tangent projection is idempotent") {
  CounterRng rng(23);
  const Eigen::MatrixXd w = random_orthogonal(rng, 8).topRows(3);
  const Eigen::MatrixXd g = random_matrix(rng, 3, 8);
  const Eigen::MatrixXd t = stiefel_tangent_project(w, g);
  CHECK(max_abs_diff(stiefel_tangent_project(w, t), t) < 1e-12);
}

TEST_CASE("zero gradient leaves the weight on the same point") {
  CounterRng rng(29);
  const Eigen::MatrixXd w = random_orthogonal(rng, 7).topRows(4);
  const Eigen::MatrixXd stepped =
      stiefel_step(w, Eigen::MatrixXd::Zero(4, 7), 0.1);
  CHECK(max_abs_diff(stepped, w) < 1e-12);
}

TEST_CASE("manifold steps preserve row orthonormality") {
  CounterRng rng(31);
  Eigen::MatrixXd w = random_orthogonal(rng, 10).topRows(5);
  for (int step = 0; step < 200; ++step) {
    const Eigen::MatrixXd g = random_matrix(rng, 5, 10);
    w = stiefel_step(w, g, 0.05);
    CHECK(stiefel_orthonormality_error(w) < 1e-12);
  }
}

TEST_CASE("descent along the projected gradient reduces a quadratic cost") {
  // Cost f(W) = 0.5·‖W − A‖² with A off the manifold: a projected step from
  // a non-critical point must decrease f.
  CounterRng rng(37);
  const Eigen::MatrixXd a = random_matrix(rng, 3, 6);
  Eigen::MatrixXd w = random_orthogonal(rng, 6).topRows(3);
  const auto cost = [&](const Eigen::MatrixXd& m) { return 0.5 * (m - a).squaredNorm(); };
  const double before = cost(w);
  const Eigen::MatrixXd g = w - a;
  const Eigen::MatrixXd after = stiefel_step(w, g, 0.01);
  CHECK(cost(after) < before);
}
