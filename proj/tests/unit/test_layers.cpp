#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "spdpool/layers.hpp"
#include "spdpool/rng.hpp"
#include "spdpool/spectral.hpp"
#include "spdpool/types.hpp"
#include "support/checks.hpp"
#include "support/finite_diff.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace spdpool;
using namespace testsupport;

namespace {

double frob_inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.cwiseProduct(b).sum();
}

}  // namespace

TEST_CASE("symmetric eigendecomposition of a hand-worked matrix") {
  Eigen::MatrixXd m(2, 2);
  m << 3, 2, 2, 3;
  const EigenPair ep = sym_eig(SymMatrix::from_symmetric(m));
  CHECK(ep.sigma[0] == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(ep.sigma[1] == doctest::Approx(1.0).epsilon(1e-14));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(ep.U(0, 0)) == doctest::Approx(r).epsilon(1e-14));
  // Eigenvectors are unit length and orthogonal.
  CHECK(max_abs_diff(ep.U.transpose() * ep.U, Eigen::MatrixXd::Identity(2, 2)) < 1e-14);
}

TEST_CASE("eigendecomposition orders descending and reconstructs") {
  CounterRng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.next_below(9));
    const SymMatrix x = random_symmetric(rng, d);
    const EigenPair ep = sym_eig(x);
    for (Eigen::Index i = 1; i < d; ++i) CHECK(ep.sigma[i - 1] >= ep.sigma[i]);
    CHECK(max_abs_diff(reconstruct(ep).mat(), x.mat()) < 1e-12);
  }
}

TEST_CASE("eigendecomposition is deterministic including signs") {
  CounterRng rng(29);
  const SymMatrix x = random_symmetric(rng, 7);
  const EigenPair a = sym_eig(x);
  const EigenPair b = sym_eig(x);
  CHECK(bitwise_equal(a.U, b.U));
  // The sign convention pins each eigenvector's dominant component positive.
  for (Eigen::Index j = 0; j < a.U.cols(); ++j) {
    Eigen::Index arg = 0;
    a.U.col(j).cwiseAbs().maxCoeff(&arg);
    CHECK(a.U(arg, j) > 0.0);
  }
}

TEST_CASE("bimap with an identity weight is the identity") {
  CounterRng rng(31);
  const SpdMatrix x = random_spd(rng, 5);
  const BiMapParams p{Eigen::MatrixXd::Identity(5, 5)};
  CHECK(max_abs_diff(bimap_forward(x, p).mat(), x.mat()) < 1e-15);
}

TEST_CASE("bimap output stays symmetric positive definite") {
  CounterRng rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = 4 + static_cast<Eigen::Index>(rng.next_below(6));
    const Eigen::Index d_out = 2 + static_cast<Eigen::Index>(rng.next_below(d - 2));
    const SpdMatrix x = random_spd(rng, d);
    const BiMapParams p{random_orthogonal(rng, d).topRows(d_out)};
    const SpdMatrix y = bimap_forward(x, p);
    CHECK(asymmetry(y.mat()) == 0.0);
    CHECK(sym_eig(SymMatrix::from_symmetric(y.mat())).sigma.minCoeff() > 0.0);
  }
}

TEST_CASE("eigenvalue rectification clamps a hand-worked spectrum") {
  Eigen::MatrixXd m = Eigen::Vector2d(1e-6, 2.0).asDiagonal();
  const auto [out, tape] = reeig_forward(SymMatrix::from_symmetric(m), ReEigParams{1e-4});
  CHECK(out.mat()(0, 0) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(out.mat()(1, 1) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(out.mat()(0, 1) == 0.0);
}

TEST_CASE("rectification leaves a well-conditioned matrix unchanged") {
  CounterRng rng(41);
  const SpdMatrix x = random_spd(rng, 6);  // spectrum floor far above epsilon
  const auto [out, tape] = reeig_forward(SymMatrix::from_symmetric(x.mat()),
                                         ReEigParams{1e-4});
  CHECK(max_abs_diff(out.mat(), x.mat()) < 1e-12);
}

TEST_CASE("rectified output spectrum never drops below the threshold") {
  CounterRng rng(43);
  const ReEigParams p{1e-4};
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.next_below(8));
    const SymMatrix x = random_symmetric(rng, d);  // indefinite in general
    const auto [out, tape] = reeig_forward(x, p);
    const EigenPair ep = sym_eig(SymMatrix::from_symmetric(out.mat()));
    CHECK(ep.sigma.minCoeff() >= p.epsilon - 1e-12);
    CHECK(asymmetry(out.mat()) == 0.0);
  }
}

TEST_CASE("matrix logarithm of a hand-worked diagonal") {
  const double e = std::exp(1.0);
  Eigen::MatrixXd m = Eigen::Vector2d(e, e * e).asDiagonal();
  const auto [out, tape] =
      logeig_forward(SpdMatrix::assume_spd(SymMatrix::from_symmetric(m)));
  CHECK(out.mat()(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(out.mat()(1, 1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(out.mat()(0, 1) == 0.0);
}

TEST_CASE("matrix logarithm inverts the matrix exponential of a spectrum") {
  CounterRng rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.next_below(7));
    const SpdMatrix x = random_spd(rng, d);
    const auto [logm, tape] = logeig_forward(x);
    const EigenPair ep = sym_eig(SymMatrix::from_symmetric(x.mat()));
    const Eigen::MatrixXd expected =
        ep.U * ep.sigma.array().log().matrix().asDiagonal() * ep.U.transpose();
    CHECK(max_abs_diff(logm.mat(), expected) < 1e-12);
  }
}

TEST_CASE("vectorization of a hand-worked matrix") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 2, 3;
  const Eigen::VectorXd v = vectorize_sym(SymMatrix::from_symmetric(m));
  REQUIRE(v.size() == 3);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(v[2] == 3.0);
}

TEST_CASE("vectorization is an isometry and matches the oracle") {
  CounterRng rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.next_below(10));
    const SymMatrix x = random_symmetric(rng, d);
    const Eigen::VectorXd v = vectorize_sym(x);
    CHECK(max_abs_diff(v, vectorize_oracle(x.mat())) < 1e-15);
    CHECK(v.norm() == doctest::Approx(x.mat().norm()).epsilon(1e-12));
  }
}

TEST_CASE("vectorize backward is the adjoint of the forward map") {
  CounterRng rng(59);
  const Eigen::Index d = 6;
  const SymMatrix x = random_symmetric(rng, d);
  Eigen::VectorXd r(d * (d + 1) / 2);
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = rng.next_gaussian();
  const SymMatrix g = vectorize_backward(r, d);
  // <vec(X), r> must equal <X, G> under the symmetric inner product.
  CHECK(vectorize_sym(x).dot(r) ==
        doctest::Approx(frob_inner(x.mat(), g.mat())).epsilon(1e-12));
}

TEST_CASE("bimap backward on identity weight and upstream") {
  CounterRng rng(61);
  const Eigen::Index d = 4;
  const SpdMatrix x = random_spd(rng, d);
  const BiMapParams p{Eigen::MatrixXd::Identity(d, d)};
  const SymMatrix upstream = SymMatrix::from_symmetric(Eigen::MatrixXd::Identity(d, d));
  const BiMapGrads grads = bimap_backward(upstream, x, p);
  CHECK(max_abs_diff(grads.grad_input.mat(), Eigen::MatrixXd::Identity(d, d)) < 1e-15);
  CHECK(max_abs_diff(grads.grad_weight, 2.0 * x.mat()) < 1e-14);
}

TEST_CASE("bimap backward matches finite differences") {
  CounterRng rng(67);
  const Eigen::Index d = 5;
  const Eigen::Index d_out = 3;
  const SymMatrix x = matrix_with_spectrum(rng, gapped_spectrum(rng, d));
  const SpdMatrix xs = SpdMatrix::assume_spd(x);
  BiMapParams p{random_orthogonal(rng, d).topRows(d_out)};
  const SymMatrix upstream = random_symmetric(rng, d_out);
  const BiMapGrads grads = bimap_backward(upstream, xs, p);

  Eigen::MatrixXd xm = x.mat();
  const auto loss_x = [&]() {
    const SpdMatrix in = SpdMatrix::assume_spd(SymMatrix::symmetrized(xm));
    return frob_inner(upstream.mat(), bimap_forward(in, p).mat());
  };
  CHECK(sym_fd_error(xm, grads.grad_input.mat(), kFdStep, loss_x) < 1e-6);

  const auto loss_w = [&]() {
    return frob_inner(upstream.mat(), bimap_forward(xs, p).mat());
  };
  CHECK(entry_fd_error(p.W, grads.grad_weight, kFdStep, loss_w) < 1e-6);
}

TEST_CASE("rectification backward matches finite differences across the clamp") {
  CounterRng rng(71);
  const ReEigParams p{1e-4};
  const Eigen::Index d = 6;
  // Mixed spectrum: some eigenvalues below the threshold, some above, all
  // outside the non-differentiable window around it.
  Eigen::VectorXd spectrum(d);
  spectrum << 2.5, 1.4, 0.6, 0.2, -0.4, -1.1;
  const SymMatrix x = matrix_with_spectrum(rng, spectrum);
  const SymMatrix upstream = random_symmetric(rng, d);
  const auto [out, tape] = reeig_forward(x, p);
  const SymMatrix grad = reeig_backward(upstream, tape, p);

  Eigen::MatrixXd xm = x.mat();
  const auto loss = [&]() {
    const auto [y, t] = reeig_forward(SymMatrix::symmetrized(xm), p);
    return frob_inner(upstream.mat(), y.mat());
  };
  CHECK(sym_fd_error(xm, grad.mat(), kFdStep, loss) < 1e-4);
}

TEST_CASE("logarithm backward on the identity input") {
  const Eigen::Index d = 3;
  const SpdMatrix x =
      SpdMatrix::assume_spd(SymMatrix::from_symmetric(Eigen::MatrixXd::Identity(d, d)));
  const auto [out, tape] = logeig_forward(x);
  const SymMatrix upstream = SymMatrix::from_symmetric(Eigen::MatrixXd::Identity(d, d));
  const SymMatrix grad = logeig_backward(upstream, tape);
  // d/dX trace(log X) = X^{-1} = I here.
  CHECK(max_abs_diff(grad.mat(), Eigen::MatrixXd::Identity(d, d)) < 1e-12);
}

TEST_CASE("logarithm backward matches finite differences") {
  CounterRng rng(73);
  const Eigen::Index d = 6;
  const SymMatrix x = matrix_with_spectrum(rng, gapped_spectrum(rng, d));
  const SymMatrix upstream = random_symmetric(rng, d);
  const auto [out, tape] = logeig_forward(SpdMatrix::assume_spd(x));
  const SymMatrix grad = logeig_backward(upstream, tape);

  Eigen::MatrixXd xm = x.mat();
  const auto loss = [&]() {
    const SpdMatrix in = SpdMatrix::assume_spd(SymMatrix::symmetrized(xm));
    return frob_inner(upstream.mat(), logeig_forward(in).first.mat());
  };
  CHECK(sym_fd_error(xm, grad.mat(), kFdStep, loss) < 1e-5);
}

TEST_CASE("spectral backward handles exactly repeated eigenvalues") {
  // A scaled identity has a fully degenerate spectrum; the divided
  // difference must fall back to the derivative instead of dividing by zero.
  const Eigen::Index d = 4;
  const double scale = 3.0;
  const SpdMatrix x = SpdMatrix::assume_spd(
      SymMatrix::from_symmetric(scale * Eigen::MatrixXd::Identity(d, d)));
  CounterRng rng(79);
  const SymMatrix upstream = random_symmetric(rng, d);
  const auto [out, tape] = logeig_forward(x);
  const SymMatrix grad = logeig_backward(upstream, tape);
  CHECK(grad.mat().allFinite());
  // For X = s·I the logarithm is Frechet-differentiable with derivative
  // G/s along symmetric directions.
  CHECK(max_abs_diff(grad.mat(), upstream.mat() / scale) < 1e-12);
}

TEST_CASE("vectorize backward round-trips through finite differences") {
  CounterRng rng(83);
  const Eigen::Index d = 5;
  const SymMatrix x = random_symmetric(rng, d);
  Eigen::VectorXd r(d * (d + 1) / 2);
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = rng.next_gaussian();
  const SymMatrix grad = vectorize_backward(r, d);

  Eigen::MatrixXd xm = x.mat();
  const auto loss = [&]() { return r.dot(vectorize_sym(SymMatrix::symmetrized(xm))); };
  CHECK(sym_fd_error(xm, grad.mat(), kFdStep, loss) < 1e-8);
}
