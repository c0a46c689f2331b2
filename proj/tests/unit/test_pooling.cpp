#include "doctest.h"

#include <Eigen/Dense>

#include "spdpool/pooling.hpp"
#include "spdpool/rng.hpp"
#include "spdpool/types.hpp"
#include "support/checks.hpp"
#include "support/finite_diff.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace spdpool;
using namespace testsupport;

namespace {

FeatureSet random_features(CounterRng& rng, Eigen::Index d, Eigen::Index n) {
  return make_feature_set(random_matrix(rng, d, n));
}

}  // namespace

TEST_CASE("covariance of two hand-worked samples") {
  Eigen::MatrixXd samples(2, 2);
  samples << 1, 3, 1, 3;
  const SymMatrix cov = compute_covariance(make_feature_set(samples));
  Eigen::MatrixXd expected(2, 2);
  expected << 2, 2, 2, 2;
  CHECK(max_abs_diff(cov.mat(), expected) == 0.0);
}

TEST_CASE("covariance matches the two-pass oracle on random sets") {
  CounterRng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.next_below(12));
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.next_below(40));
    const FeatureSet fs = random_features(rng, d, n);
    const SymMatrix cov = compute_covariance(fs);
    CHECK(scaled_max_diff(cov.mat(), covariance_oracle(fs.samples)) < 1e-13);
    CHECK(asymmetry(cov.mat()) == 0.0);
  }
}

TEST_CASE("covariance requires at least two samples") {
  Eigen::MatrixXd one(3, 1);
  one << 1, 2, 3;
  CHECK_THROWS_AS(compute_covariance(make_feature_set(one)), DataError);
}

TEST_CASE("temporal pooling is regularized covariance of the frames") {
  CounterRng rng(5);
  const FeatureSet fs = random_features(rng, 6, 20);
  const RegularizationParams params{1e-4};
  const SpdMatrix direct = regularize(compute_covariance(fs), params);
  CHECK(bitwise_equal(pool_temporal(fs, params).mat(), direct.mat()));
}

TEST_CASE("regularization adds lambda trace on the diagonal") {
  Eigen::MatrixXd m(2, 2);
  m << 2, 2, 2, 2;
  const SymMatrix cov = SymMatrix::from_symmetric(m);
  bool ineffective = true;
  const SpdMatrix out = regularize(cov, RegularizationParams{1e-4}, &ineffective);
  CHECK_FALSE(ineffective);
  Eigen::MatrixXd expected = m;
  expected.diagonal().array() += 1e-4 * 4.0;
  CHECK(max_abs_diff(out.mat(), expected) == 0.0);
}

TEST_CASE("regularizing a zero covariance is flagged ineffective") {
  const SymMatrix zero = SymMatrix::zero(3);
  bool ineffective = false;
  const SpdMatrix out = regularize(zero, RegularizationParams{1e-4}, &ineffective);
  CHECK(ineffective);
  CHECK(out.mat().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("negative regularization strength is rejected") {
  const SymMatrix zero = SymMatrix::zero(2);
  CHECK_THROWS_AS(regularize(zero, RegularizationParams{-1e-4}, nullptr), UsageError);
}

TEST_CASE("sample mean of two hand-worked samples") {
  Eigen::MatrixXd samples(2, 2);
  samples << 1, 3, 1, 3;
  const Eigen::VectorXd mu = sample_mean(make_feature_set(samples));
  CHECK(mu[0] == 2.0);
  CHECK(mu[1] == 2.0);
}

TEST_CASE("gaussian embedding matches the blockwise oracle") {
  CounterRng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.next_below(8));
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.next_below(30));
    const FeatureSet fs = random_features(rng, d, n);
    const RegularizationParams params{1e-4};
    const SpdMatrix g = gaussian_embed(fs, params);
    CHECK(scaled_max_diff(g.mat(), gaussian_embed_oracle(fs.samples, params.lambda)) <
          1e-13);
    CHECK(g.mat()(d, d) == 1.0);
    CHECK(asymmetry(g.mat()) == 0.0);
  }
}

TEST_CASE("gaussian embedding of a one-dimensional feature stream") {
  Eigen::MatrixXd samples(1, 2);
  samples << 1, 3;
  const SpdMatrix g = gaussian_embed(make_feature_set(samples), RegularizationParams{1e-4});
  // variance 2, trace 2, mean 2: top-left 2 + 2e-4 + 4.
  CHECK(g.mat()(0, 0) == doctest::Approx(6.0002).epsilon(1e-12));
  CHECK(g.mat()(0, 1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g.mat()(1, 1) == 1.0);
}

TEST_CASE("regularize backward matches finite differences") {
  CounterRng rng(11);
  const Eigen::Index d = 5;
  const SymMatrix x = random_symmetric(rng, d);
  const SymMatrix upstream = random_symmetric(rng, d);
  const RegularizationParams params{1e-2};
  const SymMatrix grad = regularize_backward(upstream, params);

  Eigen::MatrixXd xm = x.mat();
  const auto loss = [&]() {
    const SymMatrix in = SymMatrix::symmetrized(xm);
    const SpdMatrix out = regularize(in, params, nullptr);
    return out.mat().cwiseProduct(upstream.mat()).sum();
  };
  CHECK(sym_fd_error(xm, grad.mat(), kFdStep, loss) < 1e-6);
}

TEST_CASE("covariance backward matches finite differences") {
  CounterRng rng(13);
  const Eigen::Index d = 4;
  const Eigen::Index n = 9;
  FeatureSet fs = random_features(rng, d, n);
  const SymMatrix upstream = random_symmetric(rng, d);
  const Eigen::MatrixXd grad = covariance_backward(upstream, fs);

  const auto loss = [&]() {
    return compute_covariance(fs).mat().cwiseProduct(upstream.mat()).sum();
  };
  CHECK(entry_fd_error(fs.samples, grad, kFdStep, loss) < 1e-6);
}

TEST_CASE("gaussian embedding backward matches finite differences") {
  CounterRng rng(17);
  const Eigen::Index d = 4;
  const Eigen::Index n = 8;
  FeatureSet fs = random_features(rng, d, n);
  const SymMatrix upstream = random_symmetric(rng, d + 1);
  const RegularizationParams params{1e-3};
  const Eigen::MatrixXd grad = gaussian_embed_backward(upstream, fs, params);

  const auto loss = [&]() {
    return gaussian_embed(fs, params).mat().cwiseProduct(upstream.mat()).sum();
  };
  CHECK(entry_fd_error(fs.samples, grad, kFdStep, loss) < 1e-6);
}

TEST_CASE("feature map flattening treats every position as one sample") {
  // 2×1 map with 3 channels: positions are the columns after flattening.
  FeatureMap map = make_feature_map(2, 1, 3, {1, 2, 3, 4, 5, 6});
  const FeatureSet fs = flatten_spatial(map);
  CHECK(fs.dim() == 3);
  CHECK(fs.count() == 2);
  CHECK(fs.samples(0, 0) == 1.0);
  CHECK(fs.samples(2, 0) == 3.0);
  CHECK(fs.samples(0, 1) == 4.0);
  CHECK(fs.samples(2, 1) == 6.0);
}
