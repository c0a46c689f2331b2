#pragma once
// SPD network layers. BiMap reduces descriptor dimension by congruence with
// a row-orthonormal weight, ReEig clamps eigenvalues below a threshold (the
// SPD counterpart of ReLU), LogEig maps the manifold to its tangent space
// via the matrix logarithm, and vectorize_sym flattens symmetric matrices
// isometrically for Euclidean layers.
//
// The spectral backward passes use the divided-difference (Loewner) rule:
// for Y = U g(Λ) Uᵀ the coupling between eigendirections i and j is
// (g(λ_i) − g(λ_j))/(λ_i − λ_j), replaced by g′ at the midpoint when the
// eigenvalues are closer than a small δ.

#include "spdpool/spectral.hpp"

#include <utility>

namespace spdpool {

struct BiMapParams {
  Eigen::MatrixXd W;  // d_out × d_in, d_out ≤ d_in, full row rank
};

struct ReEigParams {
  double epsilon = 1e-4;  // > 0
};

/// W X Wᵀ, symmetrized. SPD for SPD input and full-row-rank W.
SpdMatrix bimap_forward(const SpdMatrix& x, const BiMapParams& p);

/// Clamps eigenvalues below ε up to ε. Returns the decomposition of the
/// *input* for the backward tape.
std::pair<SpdMatrix, EigenPair> reeig_forward(const SymMatrix& x, const ReEigParams& p);

/// Matrix logarithm via eigendecomposition; requires λ_min > 0.
std::pair<SymMatrix, EigenPair> logeig_forward(const SpdMatrix& x);

/// Upper-triangle row by row, off-diagonal entries scaled by √2 so the dot
/// product of two vectorizations equals the Frobenius inner product.
Eigen::VectorXd vectorize_sym(const SymMatrix& x);

struct BiMapGrads {
  SymMatrix grad_input;        // Wᵀ G W
  Eigen::MatrixXd grad_weight; // 2 G W X
};

BiMapGrads bimap_backward(const SymMatrix& grad_out, const SpdMatrix& x, const BiMapParams& p);

SymMatrix reeig_backward(const SymMatrix& grad_out, const EigenPair& tape, const ReEigParams& p);

SymMatrix logeig_backward(const SymMatrix& grad_out, const EigenPair& tape);

SymMatrix vectorize_backward(const Eigen::VectorXd& grad_out, Eigen::Index dim);

/// Eigenvalues closer than this share a divided-difference coefficient
/// evaluated as g′ at their midpoint.
inline constexpr double kEigenvalueMergeTolerance = 1e-10;

}  // namespace spdpool
