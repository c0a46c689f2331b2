#pragma once
// Matrix draws on top of the counter RNG. Entries are drawn in column-major
// order (Eigen's storage order) so a matrix draw advances the counter by a
// documented amount.

#include <Eigen/Dense>

#include "spdpool/rng.hpp"
#include "spdpool/stiefel.hpp"

namespace spdpool {

/// rows×cols standard Gaussian draw, column-major entry order.
inline Eigen::MatrixXd random_gaussian_matrix(CounterRng& rng, Eigen::Index rows,
                                              Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            m(i, j) = rng.next_gaussian();
        }
    }
    return m;
}

/// d×d orthogonal matrix: QR of a Gaussian draw with sign-fixed R diagonal.
inline Eigen::MatrixXd random_orthogonal(CounterRng& rng, Eigen::Index d) {
    return orthonormal_columns(random_gaussian_matrix(rng, d, d));
}

}  // namespace spdpool
