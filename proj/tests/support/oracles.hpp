#pragma once
// Brute-force reference implementations kept deliberately naive and loop
// based, so the library's linear-algebra formulations are checked against
// independent arithmetic.

#include <Eigen/Dense>
#include <vector>

namespace testsupport {

/// Two-pass sample covariance: explicit mean, then explicit accumulation of
/// centered outer products, normalized by n−1.
inline Eigen::MatrixXd covariance_oracle(const Eigen::MatrixXd& samples) {
  const Eigen::Index d = samples.rows();
  const Eigen::Index n = samples.cols();
  std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < d; ++i) {
      mean[static_cast<std::size_t>(i)] += samples(i, k);
    }
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    mean[static_cast<std::size_t>(i)] /= static_cast<double>(n);
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double ci = samples(i, k) - mean[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < d; ++j) {
        const double cj = samples(j, k) - mean[static_cast<std::size_t>(j)];
        cov(i, j) += ci * cj;
      }
    }
  }
  return cov / static_cast<double>(n - 1);
}

/// Blockwise mean-plus-covariance embedding built with explicit loops.
inline Eigen::MatrixXd gaussian_embed_oracle(const Eigen::MatrixXd& samples,
                                             double lambda) {
  const Eigen::Index d = samples.rows();
  const Eigen::Index n = samples.cols();
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  for (Eigen::Index k = 0; k < n; ++k) mu += samples.col(k);
  mu /= static_cast<double>(n);
  Eigen::MatrixXd cov = covariance_oracle(samples);
  cov += lambda * cov.trace() * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd g(d + 1, d + 1);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      g(i, j) = cov(i, j) + mu[i] * mu[j];
    }
    g(i, d) = mu[i];
    g(d, i) = mu[i];
  }
  g(d, d) = 1.0;
  return g;
}

/// Row-by-row upper-triangle flattening with the off-diagonal √2 weight.
inline Eigen::VectorXd vectorize_oracle(const Eigen::MatrixXd& sym) {
  const Eigen::Index d = sym.rows();
  Eigen::VectorXd out(d * (d + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      out[k++] = i == j ? sym(i, i) : std::sqrt(2.0) * sym(i, j);
    }
  }
  return out;
}

}  // namespace testsupport
