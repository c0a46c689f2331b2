#pragma once
// Training loop and evaluation protocol. BiMap weights are updated with the
// manifold step (tangent projection + QR retraction) so they stay
// row-orthonormal; dense layers take plain SGD steps. Evaluation credits a
// sample whose upstream extraction failed with 1/classes expected accuracy
// instead of dropping it.

#include <cstdint>
#include <functional>
#include <vector>

#include "spdpool/network.hpp"
#include "spdpool/types.hpp"

namespace spdpool {

/// One labeled sample, carrying either raw features (d×n, column per
/// vector) or a precomputed pooled descriptor. A failed sample carries
/// neither and only participates in evaluation.
struct Sample {
  Eigen::MatrixXd features;
  Eigen::MatrixXd descriptor;
  int label = 0;
  bool failed = false;

  bool pooled() const { return descriptor.size() > 0; }
};

struct Dataset {
  std::vector<Sample> samples;
};

/// max label + 1 over non-failed samples (0 for an empty set).
Eigen::Index count_classes(const Dataset& data);

struct TrainConfig {
  double learning_rate = 1e-2;   // >= 0; 0 leaves parameters untouched
  Eigen::Index epochs = 50;      // >= 0
  Eigen::Index batch_size = 32;  // >= 1
  bool shuffle = true;           // seeded epoch shuffling of sample order
  std::function<void(const TrainState&)> on_step;  // after each optimizer step
};

struct EpochRecord {
  Eigen::Index epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  TrainState state;
  std::vector<EpochRecord> history;
};

/// Mini-batch SGD from a fresh seeded initialization. Deterministic given
/// the spec seed; shuffling draws from the same counter stream as
/// initialization. Throws NumericalError when the loss leaves the finite
/// range or a batch computation collapses numerically; the message carries
/// the 1-based index of the step that failed.
TrainResult train(const NetworkSpec& spec, const TrainConfig& config,
                  const Dataset& train_data, const Dataset& val_data);

/// Fraction correct, with failed samples contributing 1/classes.
double evaluate(const NetworkSpec& spec, const TrainState& state, const Dataset& data);

}  // namespace spdpool
