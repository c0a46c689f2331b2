#pragma once
// Finite-difference verification of the backward passes. Layer checks build
// random instances with safeguarded spectra (eigengap bounded below and
// eigenvalues kept away from the rectification threshold) and compare
// analytic gradients against central differences entry by entry; network
// checks run the same comparison through every preset's full stack,
// covering each parameter tensor and the raw input.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spdpool {

struct GradCheckOptions {
  Eigen::Index dim = 8;       // descriptor side length, 2..16
  std::uint64_t seed = 1;
  int instances = 20;         // random instances per layer check
  double step = 1e-6;         // central-difference step
  double tolerance = 1e-4;    // relative-error threshold
  bool networks = true;       // include the per-preset full-network checks
  std::string preset_filter;  // restrict network checks to one preset; empty = all
  std::string corrupt_layer;  // test hook: skew this check's analytic gradient
};

struct LayerCheck {
  std::string name;
  double max_rel_error = 0.0;
};

/// |a−b| / max(|a|, |b|, 1e−4): relative error with an absolute floor so
/// near-zero gradient entries compare by absolute difference.
double gradient_rel_error(double analytic, double fd);

/// Runs checks named bimap, reeig, logeig, vectorize, dense, softmax_xent,
/// then network:<preset> for every preset (one instance each). Dense
/// parameter tensors wider than 512 entries are probed at 256 seeded
/// random coordinates instead of exhaustively.
std::vector<LayerCheck> run_gradient_checks(const GradCheckOptions& options);

}  // namespace spdpool
