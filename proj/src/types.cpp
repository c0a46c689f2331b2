#include "spdpool/types.hpp"

namespace spdpool {

FeatureMap make_feature_map(int width, int height, int channels,
                            std::vector<double> values) {
  if (width < 1 || height < 1 || channels < 1) {
    throw std::invalid_argument("feature map extents must be positive");
  }
  FeatureMap map{width, height, channels, std::move(values)};
  if (map.values.size() != map.value_count()) {
    throw std::invalid_argument("feature map buffer length does not match extents");
  }
  for (double v : map.values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("non-finite feature map value");
    }
  }
  return map;
}

FeatureSet make_feature_set(Eigen::MatrixXd samples) {
  if (samples.rows() < 1 || samples.cols() < 1) {
    throw std::invalid_argument("feature set must hold at least one vector");
  }
  if (!samples.allFinite()) {
    throw std::invalid_argument("non-finite feature value");
  }
  return FeatureSet{std::move(samples)};
}

SymMatrix SymMatrix::symmetrized(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("symmetric matrix must be square");
  }
  if (!a.allFinite()) {
    throw NumericalError("non-finite matrix entry");
  }
  Eigen::MatrixXd m = 0.5 * (a + a.transpose());
  return SymMatrix(std::move(m));
}

SymMatrix SymMatrix::from_symmetric(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("symmetric matrix must be square");
  }
  if (!a.allFinite()) {
    throw NumericalError("non-finite matrix entry");
  }
  if (a != a.transpose().eval()) {
    throw std::invalid_argument("matrix is not exactly symmetric");
  }
  return SymMatrix(a);
}

SymMatrix SymMatrix::zero(Eigen::Index dim) {
  return SymMatrix(Eigen::MatrixXd::Zero(dim, dim));
}

SpdMatrix SpdMatrix::checked(SymMatrix s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s.mat());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition failed");
  }
  if (solver.eigenvalues().minCoeff() <= 0.0) {
    throw NumericalError("matrix not positive definite");
  }
  return SpdMatrix(std::move(s));
}

}  // namespace spdpool
