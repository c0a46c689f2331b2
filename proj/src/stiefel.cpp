#include "spdpool/stiefel.hpp"

#include <Eigen/QR>
#include <cmath>

#include "spdpool/types.hpp"

namespace spdpool {

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& a) {
    if (a.rows() < a.cols()) {
        throw NumericalError("orthonormalization needs rows >= cols");
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
    const Eigen::MatrixXd r = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        const double d = r(j, j);
        if (d == 0.0 || !std::isfinite(d)) {
            throw NumericalError("rank collapse during orthonormalization");
        }
        if (d < 0.0) {
            q.col(j) = -q.col(j);
        }
    }
    return q;
}

Eigen::MatrixXd stiefel_tangent_project(const Eigen::MatrixXd& w, const Eigen::MatrixXd& grad) {
    return grad - grad * w.transpose() * w;
}

Eigen::MatrixXd stiefel_retract(const Eigen::MatrixXd& a) {
    return orthonormal_columns(a.transpose()).transpose();
}

Eigen::MatrixXd stiefel_step(const Eigen::MatrixXd& w, const Eigen::MatrixXd& grad_euclidean,
                             double learning_rate) {
    const Eigen::MatrixXd tangent = stiefel_tangent_project(w, grad_euclidean);
    return stiefel_retract(w - learning_rate * tangent);
}

double stiefel_orthonormality_error(const Eigen::MatrixXd& w) {
    const Eigen::MatrixXd gram = w * w.transpose();
    return (gram - Eigen::MatrixXd::Identity(w.rows(), w.rows())).cwiseAbs().maxCoeff();
}

}  // namespace spdpool
