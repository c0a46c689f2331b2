#pragma once
// Optimization over row-orthonormal matrices (W Wᵀ = I). The Euclidean
// gradient is projected onto the tangent space, a step is taken, and the
// result is retracted back onto the manifold by a QR factorization with the
// R diagonal forced positive (which makes the retraction unique and maps a
// zero step to the identity).

#include <Eigen/Dense>

namespace spdpool {

/// Thin QR orthonormalization of the columns of a, with sign-fixed R
/// diagonal. Throws NumericalError on rank collapse.
Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& a);

/// Tangent-space projection for the row-orthonormal convention:
/// G − G Wᵀ W. Idempotent when W Wᵀ = I.
Eigen::MatrixXd stiefel_tangent_project(const Eigen::MatrixXd& w, const Eigen::MatrixXd& grad);

/// Row-orthonormalization of a (QR retraction applied to aᵀ).
Eigen::MatrixXd stiefel_retract(const Eigen::MatrixXd& a);

/// One constrained SGD step: project, step, retract.
Eigen::MatrixXd stiefel_step(const Eigen::MatrixXd& w, const Eigen::MatrixXd& grad_euclidean,
                             double learning_rate);

/// ‖W Wᵀ − I‖_max.
double stiefel_orthonormality_error(const Eigen::MatrixXd& w);

}  // namespace spdpool
