#include "spdpool/pooling.hpp"

namespace spdpool {

FeatureSet flatten_spatial(const FeatureMap& map) {
  if (map.width < 1 || map.height < 1 || map.channels < 1) {
    throw std::invalid_argument("feature map extents must be positive");
  }
  if (map.values.size() != map.value_count()) {
    throw std::invalid_argument("feature map buffer length does not match extents");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(map.width) * map.height;
  const Eigen::Index d = map.channels;
  Eigen::MatrixXd samples(d, n);
  // Position k = row*w + col holds its channel values contiguously.
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index c = 0; c < d; ++c) {
      samples(c, k) = map.values[static_cast<std::size_t>(k) * d + c];
    }
  }
  return make_feature_set(std::move(samples));
}

SymMatrix compute_covariance(const FeatureSet& features) {
  if (features.count() < 2) {
    throw DataError("insufficient samples: covariance needs n >= 2");
  }
  if (!features.samples.allFinite()) {
    throw DataError("non-finite feature value");
  }
  const Eigen::Index n = features.count();
  const Eigen::VectorXd mean = features.samples.rowwise().mean();
  const Eigen::MatrixXd centered = features.samples.colwise() - mean;
  Eigen::MatrixXd c = (centered * centered.transpose()) / static_cast<double>(n - 1);
  return SymMatrix::symmetrized(c);
}

SpdMatrix regularize(const SymMatrix& c, const RegularizationParams& params,
                     bool* ineffective) {
  if (params.lambda < 0.0) {
    throw UsageError("regularization lambda must be nonnegative");
  }
  if (ineffective) *ineffective = false;
  const double shift = params.lambda * c.mat().trace();
  if (shift == 0.0 && params.lambda > 0.0 && ineffective) {
    *ineffective = true;  // zero-trace covariance stays singular
  }
  Eigen::MatrixXd out = c.mat();
  out.diagonal().array() += shift;
  return SpdMatrix::assume_spd(SymMatrix::from_symmetric(out));
}

SpdMatrix pool_temporal(const FeatureSet& frames, const RegularizationParams& params,
                        bool* ineffective) {
  return regularize(compute_covariance(frames), params, ineffective);
}

Eigen::VectorXd sample_mean(const FeatureSet& features) {
  return features.samples.rowwise().mean();
}

SpdMatrix gaussian_embed(const FeatureSet& features, const RegularizationParams& params,
                         bool* ineffective) {
  const SpdMatrix sigma = pool_temporal(features, params, ineffective);
  const Eigen::VectorXd mu = sample_mean(features);
  const Eigen::Index d = features.dim();
  Eigen::MatrixXd g(d + 1, d + 1);
  g.topLeftCorner(d, d) = sigma.mat() + mu * mu.transpose();
  g.topRightCorner(d, 1) = mu;
  g.bottomLeftCorner(1, d) = mu.transpose();
  g(d, d) = 1.0;
  return SpdMatrix::assume_spd(SymMatrix::symmetrized(g));
}

SymMatrix regularize_backward(const SymMatrix& grad_out, const RegularizationParams& params) {
  Eigen::MatrixXd g = grad_out.mat();
  g.diagonal().array() += params.lambda * grad_out.mat().trace();
  return SymMatrix::from_symmetric(g);
}

Eigen::MatrixXd covariance_backward(const SymMatrix& grad_out, const FeatureSet& features) {
  const Eigen::Index n = features.count();
  if (n < 2) {
    throw DataError("insufficient samples: covariance needs n >= 2");
  }
  const Eigen::VectorXd mean = features.samples.rowwise().mean();
  const Eigen::MatrixXd centered = features.samples.colwise() - mean;
  return (2.0 / static_cast<double>(n - 1)) * grad_out.mat() * centered;
}

Eigen::MatrixXd gaussian_embed_backward(const SymMatrix& grad_out, const FeatureSet& features,
                                        const RegularizationParams& params) {
  const Eigen::Index d = features.dim();
  const Eigen::Index n = features.count();
  if (grad_out.dim() != d + 1) {
    throw std::invalid_argument("gradient dimension does not match embedding");
  }
  const Eigen::MatrixXd a = grad_out.mat().topLeftCorner(d, d);
  const Eigen::VectorXd b = grad_out.mat().topRightCorner(d, 1);
  const Eigen::VectorXd mu = sample_mean(features);

  // Covariance block: A flows back through the trace shift, then the
  // covariance itself.
  const SymMatrix grad_sigma =
      regularize_backward(SymMatrix::symmetrized(a), params);
  Eigen::MatrixXd grad = covariance_backward(grad_sigma, features);

  // Mean path: μ appears in the μμᵀ block and both off-diagonal blocks.
  const Eigen::VectorXd grad_mu = 2.0 * (a * mu) + 2.0 * b;
  grad.colwise() += grad_mu / static_cast<double>(n);
  return grad;
}

}  // namespace spdpool
