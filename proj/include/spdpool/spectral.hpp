#pragma once
// Symmetric eigendecomposition with a deterministic convention: eigenvalues
// sorted descending and each eigenvector's sign fixed so that its
// largest-magnitude component is positive. Deterministic tapes make layer
// backward passes and checkpoint comparisons reproducible.

#include "spdpool/types.hpp"

namespace spdpool {

struct EigenPair {
  Eigen::MatrixXd U;      // orthogonal; columns are eigenvectors
  Eigen::VectorXd sigma;  // eigenvalues, descending
};

/// Self-adjoint decomposition of x; throws NumericalError on failure.
EigenPair sym_eig(const SymMatrix& x);

/// U diag(sigma) Uᵀ, symmetrized.
SymMatrix reconstruct(const EigenPair& pair);

}  // namespace spdpool
