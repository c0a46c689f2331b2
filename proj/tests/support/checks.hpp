#pragma once
// Shared comparison helpers for the test suites.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace testsupport {

/// Relative error with a small absolute floor so near-zero pairs compare
/// sanely.
inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-4});
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

/// Largest deviation from symmetry.
inline double asymmetry(const Eigen::MatrixXd& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

/// Entrywise difference scaled by the larger matrix magnitude (floored at 1),
/// so comparisons stay meaningful when entries cancel to near zero.
inline double scaled_max_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale =
      std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), 1.0});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (std::memcmp(&a(i, j), &b(i, j), sizeof(double)) != 0) return false;
    }
  }
  return true;
}

}  // namespace testsupport
