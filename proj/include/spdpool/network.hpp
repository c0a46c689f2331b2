#pragma once
// Network assembly: layer descriptors, spec validation, preset construction,
// parameter initialization, and the forward/backward passes that chain the
// pooling and manifold layers into a classifier.
//
// A valid stack is: one pooling layer, zero or more BiMap/ReEig layers, one
// LogEig, one Vectorize, zero or more Dense layers, terminal Softmax. Dense
// layers are linear (no activation); the only nonlinearities are ReEig on
// the manifold side and the terminal softmax.

#include <cstdint>
#include <string>
#include <vector>

#include "spdpool/layers.hpp"
#include "spdpool/pooling.hpp"
#include "spdpool/types.hpp"

namespace spdpool {

enum class LayerKind : std::uint8_t {
  CovPool = 0,
  GaussPool = 1,
  BiMap = 2,
  ReEig = 3,
  LogEig = 4,
  Vectorize = 5,
  Dense = 6,
  Softmax = 7,
};

const char* layer_name(LayerKind kind);

/// One layer. `units` is the BiMap output dimension, Dense width, or Softmax
/// class count; `value` is the pooling regularization strength λ or the
/// ReEig threshold ε. Unused fields stay zero.
struct LayerDesc {
  LayerKind kind = LayerKind::CovPool;
  Eigen::Index units = 0;
  double value = 0.0;
};

LayerDesc cov_pool(double lambda = 1e-4);
LayerDesc gauss_pool(double lambda = 1e-4);
LayerDesc bimap(Eigen::Index d_out);
LayerDesc reeig(double epsilon = 1e-4);
LayerDesc logeig();
LayerDesc vectorize();
LayerDesc dense(Eigen::Index units);
LayerDesc softmax(Eigen::Index classes);

struct NetworkSpec {
  std::vector<LayerDesc> layers;
  std::uint64_t seed = 0;
};

/// Checks stack ordering and dimension propagation for the given input
/// feature dimension. Throws UsageError with a specific message.
void validate_spec(const NetworkSpec& spec, Eigen::Index input_dim);

/// Class count of the terminal softmax.
Eigen::Index spec_classes(const NetworkSpec& spec);

/// Side length of the pooled descriptor: d for covariance pooling, d+1 for
/// the Gaussian embedding.
Eigen::Index descriptor_dim(const NetworkSpec& spec, Eigen::Index input_dim);

const std::vector<std::string>& preset_names();

/// Named layer stacks. model1: Cov, BiRe, LogEig, Dense 2000, classifier.
/// model2 inserts Dense 128 before the classifier; model3 uses two BiRe
/// blocks; model4 inserts Dense 512. bire2/bire3/bire4: that many BiRe
/// blocks, then LogEig and a single classifier layer. BiMap output
/// dimensions halve per block, floored at 4.
NetworkSpec build_preset(const std::string& name, Eigen::Index input_dim,
                         Eigen::Index classes);

/// Parameters of one layer; matrices are empty for layers without them.
struct LayerParams {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
};

struct TrainState {
  std::vector<LayerParams> params;  // aligned with NetworkSpec::layers
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  double best_val_accuracy = 0.0;
  std::uint64_t rng_counter = 0;  // position in the seed-derived draw stream
};

/// Seeded initialization: each BiMap weight is the leading rows of a random
/// orthogonal matrix (so it starts on the manifold); Dense weights are
/// Gaussian scaled by 0.01 with zero bias.
TrainState init_state(const NetworkSpec& spec, Eigen::Index input_dim);

/// Per-layer intermediates recorded by forward for the backward pass.
struct TapeEntry {
  Eigen::MatrixXd features;  // pooling input, empty on the pooled path
  SpdMatrix spd_in;          // BiMap input
  EigenPair eig;             // ReEig/LogEig input decomposition
  Eigen::Index dim_in = 0;   // Vectorize input side length
  Eigen::VectorXd vec_in;    // Dense input
  Eigen::VectorXd probs;     // Softmax output
};

struct LayerTape {
  std::vector<TapeEntry> entries;
  bool pooled_input = false;
};

struct Prediction {
  Eigen::VectorXd probabilities;  // simplex vector
  Eigen::Index label = 0;         // argmax, lowest index on ties
};

/// Full pass from raw features, including the pooling layer.
Prediction forward(const NetworkSpec& spec, const TrainState& state,
                   const FeatureSet& input, LayerTape* tape = nullptr);

/// Pass starting from a precomputed descriptor; the pooling layer is an
/// identity (the descriptor is taken as already regularized).
Prediction forward_pooled(const NetworkSpec& spec, const TrainState& state,
                          const SpdMatrix& descriptor, LayerTape* tape = nullptr);

/// Applies the spec's pooling layer to raw features.
SpdMatrix pool_descriptor(const NetworkSpec& spec, const FeatureSet& input,
                          bool* regularization_ineffective = nullptr);

struct Gradients {
  std::vector<LayerParams> params;  // aligned with NetworkSpec::layers
  Eigen::MatrixXd input;  // d×n feature gradient; descriptor gradient on the pooled path
  double loss = 0.0;      // -log p_label
};

/// Cross-entropy backward through the whole stack. BiMap weight gradients
/// are Euclidean; the tangent projection belongs to the optimizer.
Gradients backward(const NetworkSpec& spec, const TrainState& state,
                   const LayerTape& tape, Eigen::Index label);

double cross_entropy(const Eigen::VectorXd& probabilities, Eigen::Index label);

}  // namespace spdpool
