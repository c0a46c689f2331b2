#pragma once
// Second-order pooling. A set of feature vectors is summarized by its sample
// covariance C = 1/(n-1) Σ (f_i - f̄)(f_i - f̄)ᵀ, lifted to a strictly
// positive-definite descriptor by trace regularization C + λ·trace(C)·I.
// The Gaussian embedding augments the covariance with the sample mean in a
// (d+1)×(d+1) SPD block matrix. All arithmetic is double precision.

#include "spdpool/types.hpp"

namespace spdpool {

struct RegularizationParams {
  double lambda = 1e-4;  // ≥ 0; > 0 needed to lift singular covariances
};

/// Treats each of the w·h spatial positions of a feature map as one
/// d-dimensional sample. Vector k corresponds to position
/// (row, col) = (k / w, k % w).
FeatureSet flatten_spatial(const FeatureMap& map);

/// Sample covariance with the n-1 divisor. Requires n ≥ 2.
SymMatrix compute_covariance(const FeatureSet& features);

/// C + λ·trace(C)·I. When trace(C) = 0 the shift is a no-op and the result
/// stays singular; that case sets *ineffective instead of failing.
SpdMatrix regularize(const SymMatrix& c, const RegularizationParams& params,
                     bool* ineffective = nullptr);

/// Regularized covariance of a frame sequence; exactly
/// regularize(compute_covariance(frames), params).
SpdMatrix pool_temporal(const FeatureSet& frames, const RegularizationParams& params,
                        bool* ineffective = nullptr);

/// (d+1)×(d+1) descriptor [[Σ + μμᵀ, μ], [μᵀ, 1]] with Σ the regularized
/// covariance and μ the sample mean.
SpdMatrix gaussian_embed(const FeatureSet& features, const RegularizationParams& params,
                         bool* ineffective = nullptr);

Eigen::VectorXd sample_mean(const FeatureSet& features);

// Adjoints of the pooling maps, consumed by network backpropagation. Each
// takes the loss gradient with respect to its output (symmetric convention)
// and returns the gradient with respect to its input.

SymMatrix regularize_backward(const SymMatrix& grad_out, const RegularizationParams& params);

/// d×n matrix whose column i is ∂loss/∂f_i = 2/(n-1)·G·(f_i - f̄).
Eigen::MatrixXd covariance_backward(const SymMatrix& grad_out, const FeatureSet& features);

Eigen::MatrixXd gaussian_embed_backward(const SymMatrix& grad_out, const FeatureSet& features,
                                        const RegularizationParams& params);

}  // namespace spdpool
