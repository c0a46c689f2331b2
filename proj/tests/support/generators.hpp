#pragma once
// Seeded random inputs for property tests. Spectrum-controlled constructions
// keep eigengaps away from the degenerate configurations that finite
// differences cannot probe.

#include <Eigen/Dense>
#include <algorithm>

#include "spdpool/random_matrix.hpp"
#include "spdpool/rng.hpp"
#include "spdpool/types.hpp"

namespace testsupport {

inline Eigen::MatrixXd random_matrix(spdpool::CounterRng& rng, Eigen::Index rows,
                                     Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.next_gaussian();
  }
  return m;
}

inline spdpool::SymMatrix random_symmetric(spdpool::CounterRng& rng, Eigen::Index d) {
  return spdpool::SymMatrix::symmetrized(random_matrix(rng, d, d));
}

/// Descending strictly positive spectrum with pairwise gaps of at least
/// `gap`, starting from `floor`.
inline Eigen::VectorXd gapped_spectrum(spdpool::CounterRng& rng, Eigen::Index d,
                                       double floor_value = 0.2, double gap = 0.15) {
  Eigen::VectorXd s(d);
  double level = floor_value;
  for (Eigen::Index i = d - 1; i >= 0; --i) {
    s[i] = level;
    level += gap + rng.next_unit();
  }
  return s;
}

/// Symmetric matrix with the given spectrum in a random orthogonal basis.
inline spdpool::SymMatrix matrix_with_spectrum(spdpool::CounterRng& rng,
                                               const Eigen::VectorXd& spectrum) {
  const Eigen::MatrixXd q =
      spdpool::random_orthogonal(rng, spectrum.size());
  return spdpool::SymMatrix::symmetrized(q * spectrum.asDiagonal() * q.transpose());
}

inline spdpool::SpdMatrix random_spd(spdpool::CounterRng& rng, Eigen::Index d) {
  return spdpool::SpdMatrix::assume_spd(
      matrix_with_spectrum(rng, gapped_spectrum(rng, d)));
}

}  // namespace testsupport
