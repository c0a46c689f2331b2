#include "spdpool/layers.hpp"

#include <cmath>

namespace spdpool {

namespace {

// Adjoint of X ↦ U g(Λ) Uᵀ at the decomposition in `tape`:
// grad_in = U (K ∘ (Uᵀ G U)) Uᵀ with K the divided-difference matrix.
template <typename G, typename GPrime>
SymMatrix spectral_backward(const SymMatrix& grad_out, const EigenPair& tape,
                            G&& g, GPrime&& g_prime) {
  const Eigen::Index d = tape.sigma.size();
  if (grad_out.dim() != d) {
    throw std::invalid_argument("gradient dimension does not match tape");
  }
  Eigen::MatrixXd coeff(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double li = tape.sigma(i);
      const double lj = tape.sigma(j);
      if (std::abs(li - lj) > kEigenvalueMergeTolerance) {
        coeff(i, j) = (g(li) - g(lj)) / (li - lj);
      } else {
        coeff(i, j) = g_prime(0.5 * (li + lj));
      }
    }
  }
  const Eigen::MatrixXd rotated =
      tape.U.transpose() * grad_out.mat() * tape.U;
  return SymMatrix::symmetrized(tape.U * coeff.cwiseProduct(rotated) *
                                tape.U.transpose());
}

}  // namespace

SpdMatrix bimap_forward(const SpdMatrix& x, const BiMapParams& p) {
  if (p.W.cols() != x.dim()) {
    throw std::invalid_argument("bimap weight does not match input dimension");
  }
  if (p.W.rows() > p.W.cols()) {
    throw std::invalid_argument("bimap cannot increase dimension");
  }
  return SpdMatrix::assume_spd(
      SymMatrix::symmetrized(p.W * x.mat() * p.W.transpose()));
}

std::pair<SpdMatrix, EigenPair> reeig_forward(const SymMatrix& x, const ReEigParams& p) {
  if (p.epsilon <= 0.0) {
    throw std::invalid_argument("rectification threshold must be positive");
  }
  EigenPair pair = sym_eig(x);
  const Eigen::VectorXd clamped = pair.sigma.cwiseMax(p.epsilon);
  SymMatrix out = SymMatrix::symmetrized(
      pair.U * clamped.asDiagonal() * pair.U.transpose());
  return {SpdMatrix::assume_spd(std::move(out)), std::move(pair)};
}

std::pair<SymMatrix, EigenPair> logeig_forward(const SpdMatrix& x) {
  EigenPair pair = sym_eig(x.sym());
  if (pair.sigma.minCoeff() <= 0.0) {
    throw NumericalError("matrix not positive definite");
  }
  SymMatrix out = SymMatrix::symmetrized(
      pair.U * pair.sigma.array().log().matrix().asDiagonal() *
      pair.U.transpose());
  return {std::move(out), std::move(pair)};
}

Eigen::VectorXd vectorize_sym(const SymMatrix& x) {
  const Eigen::Index d = x.dim();
  Eigen::VectorXd v(d * (d + 1) / 2);
  const double root2 = std::sqrt(2.0);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    v(k++) = x.mat()(i, i);
    for (Eigen::Index j = i + 1; j < d; ++j) {
      v(k++) = root2 * x.mat()(i, j);
    }
  }
  return v;
}

BiMapGrads bimap_backward(const SymMatrix& grad_out, const SpdMatrix& x, const BiMapParams& p) {
  if (p.W.cols() != x.dim() || grad_out.dim() != p.W.rows()) {
    throw std::invalid_argument("bimap gradient shape mismatch");
  }
  BiMapGrads grads;
  grads.grad_input =
      SymMatrix::symmetrized(p.W.transpose() * grad_out.mat() * p.W);
  grads.grad_weight = 2.0 * grad_out.mat() * p.W * x.mat();
  return grads;
}

SymMatrix reeig_backward(const SymMatrix& grad_out, const EigenPair& tape, const ReEigParams& p) {
  const double eps = p.epsilon;
  // Subgradient at λ = ε takes the active side (slope 1).
  return spectral_backward(
      grad_out, tape, [eps](double l) { return l > eps ? l : eps; },
      [eps](double l) { return l >= eps ? 1.0 : 0.0; });
}

SymMatrix logeig_backward(const SymMatrix& grad_out, const EigenPair& tape) {
  if (tape.sigma.minCoeff() <= 0.0) {
    throw NumericalError("nonpositive eigenvalue in tape");
  }
  return spectral_backward(grad_out, tape, [](double l) { return std::log(l); },
                           [](double l) { return 1.0 / l; });
}

SymMatrix vectorize_backward(const Eigen::VectorXd& grad_out, Eigen::Index dim) {
  if (grad_out.size() != dim * (dim + 1) / 2) {
    throw std::invalid_argument("vectorized gradient length mismatch");
  }
  Eigen::MatrixXd g(dim, dim);
  const double half_root2 = std::sqrt(2.0) / 2.0;
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    g(i, i) = grad_out(k++);
    for (Eigen::Index j = i + 1; j < dim; ++j) {
      const double off = half_root2 * grad_out(k++);
      g(i, j) = off;
      g(j, i) = off;
    }
  }
  return SymMatrix::from_symmetric(g);
}

}  // namespace spdpool
