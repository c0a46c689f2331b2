#pragma once
// Core value types: feature containers and symmetric / SPD matrix wrappers.
// SymMatrix guarantees exact entrywise symmetry by construction; SpdMatrix
// additionally records that all eigenvalues are strictly positive.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spdpool {

/// Malformed or unreadable input data (files, manifests).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A computation left the numeric domain: non-finite values, failed
/// eigendecomposition, loss of positive definiteness, diverged loss.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid command-line or configuration input.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Dense w×h×d activation volume. Values are row-major: row (height index)
/// slowest, then column, with the d channel values of one spatial position
/// stored contiguously.
struct FeatureMap {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> values;

  std::size_t value_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(channels);
  }
};

/// Validates extents and buffer length, rejects non-finite entries.
FeatureMap make_feature_map(int width, int height, int channels,
                            std::vector<double> values);

/// Ordered collection of n feature vectors in R^d, stored as the columns of
/// a d×n matrix (column i is f_i).
struct FeatureSet {
  Eigen::MatrixXd samples;

  Eigen::Index dim() const { return samples.rows(); }
  Eigen::Index count() const { return samples.cols(); }
};

/// Validates shape (d ≥ 1, n ≥ 1) and finiteness.
FeatureSet make_feature_set(Eigen::MatrixXd samples);

/// Dense symmetric matrix. The wrapped storage satisfies m == mᵀ exactly
/// (bitwise), which construction enforces.
class SymMatrix {
public:
  SymMatrix() = default;

  /// (A + Aᵀ)/2. IEEE addition is commutative, so the result is exactly
  /// symmetric. Rejects non-square and non-finite input.
  static SymMatrix symmetrized(const Eigen::MatrixXd& a);

  /// Accepts only an already exactly-symmetric matrix.
  static SymMatrix from_symmetric(const Eigen::MatrixXd& a);

  static SymMatrix zero(Eigen::Index dim);

  const Eigen::MatrixXd& mat() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

private:
  explicit SymMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}
  Eigen::MatrixXd m_;
};

/// Symmetric matrix with strictly positive eigenvalues. Produced by
/// operations that guarantee the property (regularization, eigenvalue
/// rectification, full-rank congruence) or by the eigenvalue-checked
/// factory.
class SpdMatrix {
public:
  SpdMatrix() = default;

  /// Trusted construction for results that are SPD by construction.
  static SpdMatrix assume_spd(SymMatrix s) { return SpdMatrix(std::move(s)); }

  /// Verifies λ_min > 0 via eigendecomposition; throws NumericalError.
  static SpdMatrix checked(SymMatrix s);

  const SymMatrix& sym() const { return s_; }
  const Eigen::MatrixXd& mat() const { return s_.mat(); }
  Eigen::Index dim() const { return s_.dim(); }

  operator const SymMatrix&() const { return s_; }

private:
  explicit SpdMatrix(SymMatrix s) : s_(std::move(s)) {}
  SymMatrix s_;
};

}  // namespace spdpool
