#include "spdpool/network.hpp"

#include <algorithm>
#include <cmath>

#include "spdpool/random_matrix.hpp"
#include "spdpool/rng.hpp"

namespace spdpool {

namespace {

bool is_pooling(LayerKind kind) {
  return kind == LayerKind::CovPool || kind == LayerKind::GaussPool;
}

/// Preset BiMap width: halve, floored at 4, never above the input width.
Eigen::Index next_bimap_dim(Eigen::Index d) {
  return std::min(d, std::max<Eigen::Index>(d / 2, 4));
}

}  // namespace

const char* layer_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::CovPool: return "cov_pool";
    case LayerKind::GaussPool: return "gauss_pool";
    case LayerKind::BiMap: return "bimap";
    case LayerKind::ReEig: return "reeig";
    case LayerKind::LogEig: return "logeig";
    case LayerKind::Vectorize: return "vectorize";
    case LayerKind::Dense: return "dense";
    case LayerKind::Softmax: return "softmax";
  }
  return "unknown";
}

LayerDesc cov_pool(double lambda) { return {LayerKind::CovPool, 0, lambda}; }
LayerDesc gauss_pool(double lambda) { return {LayerKind::GaussPool, 0, lambda}; }
LayerDesc bimap(Eigen::Index d_out) { return {LayerKind::BiMap, d_out, 0.0}; }
LayerDesc reeig(double epsilon) { return {LayerKind::ReEig, 0, epsilon}; }
LayerDesc logeig() { return {LayerKind::LogEig, 0, 0.0}; }
LayerDesc vectorize() { return {LayerKind::Vectorize, 0, 0.0}; }
LayerDesc dense(Eigen::Index units) { return {LayerKind::Dense, units, 0.0}; }
LayerDesc softmax(Eigen::Index classes) { return {LayerKind::Softmax, classes, 0.0}; }

void validate_spec(const NetworkSpec& spec, Eigen::Index input_dim) {
  if (input_dim < 1) {
    throw UsageError("input dimension must be positive");
  }
  if (spec.layers.empty()) {
    throw UsageError("empty layer stack");
  }
  const LayerDesc& first = spec.layers.front();
  if (!is_pooling(first.kind)) {
    throw UsageError("first layer must be a pooling layer");
  }
  if (first.value < 0.0) {
    throw UsageError("regularization strength must be nonnegative");
  }
  Eigen::Index dim = first.kind == LayerKind::CovPool ? input_dim : input_dim + 1;
  bool seen_logeig = false;
  bool seen_vectorize = false;
  const std::size_t n = spec.layers.size();
  for (std::size_t i = 1; i < n; ++i) {
    const LayerDesc& l = spec.layers[i];
    switch (l.kind) {
      case LayerKind::CovPool:
      case LayerKind::GaussPool:
        throw UsageError("pooling layer must appear exactly once, first");
      case LayerKind::BiMap:
        if (seen_logeig) {
          throw UsageError("bimap layers must precede logeig");
        }
        if (l.units < 1 || l.units > dim) {
          throw UsageError("bimap output dimension out of range");
        }
        dim = l.units;
        break;
      case LayerKind::ReEig:
        if (seen_logeig) {
          throw UsageError("reeig layers must precede logeig");
        }
        if (!(l.value > 0.0)) {
          throw UsageError("reeig threshold must be positive");
        }
        break;
      case LayerKind::LogEig:
        if (seen_logeig) {
          throw UsageError("logeig must appear exactly once");
        }
        seen_logeig = true;
        break;
      case LayerKind::Vectorize:
        if (!seen_logeig) {
          throw UsageError("vectorize must follow logeig");
        }
        if (seen_vectorize) {
          throw UsageError("vectorize must appear exactly once");
        }
        seen_vectorize = true;
        dim = dim * (dim + 1) / 2;
        break;
      case LayerKind::Dense:
        if (!seen_vectorize) {
          throw UsageError("dense layers must follow vectorize");
        }
        if (l.units < 1) {
          throw UsageError("dense width must be positive");
        }
        dim = l.units;
        break;
      case LayerKind::Softmax:
        if (i + 1 != n) {
          throw UsageError("softmax must be the terminal layer");
        }
        if (!seen_vectorize) {
          throw UsageError("softmax must follow vectorize");
        }
        if (l.units != dim) {
          throw UsageError("softmax class count must match incoming width");
        }
        break;
    }
  }
  if (spec.layers.back().kind != LayerKind::Softmax) {
    throw UsageError("layer stack must end with softmax");
  }
  if (!seen_logeig) {
    throw UsageError("layer stack must contain logeig");
  }
}

Eigen::Index spec_classes(const NetworkSpec& spec) {
  if (spec.layers.empty() || spec.layers.back().kind != LayerKind::Softmax) {
    throw UsageError("layer stack must end with softmax");
  }
  return spec.layers.back().units;
}

Eigen::Index descriptor_dim(const NetworkSpec& spec, Eigen::Index input_dim) {
  if (spec.layers.empty() || !is_pooling(spec.layers.front().kind)) {
    throw UsageError("first layer must be a pooling layer");
  }
  return spec.layers.front().kind == LayerKind::CovPool ? input_dim : input_dim + 1;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "model1", "model2", "model3", "model4", "bire2", "bire3", "bire4"};
  return names;
}

NetworkSpec build_preset(const std::string& name, Eigen::Index input_dim,
                         Eigen::Index classes) {
  if (input_dim < 1) {
    throw UsageError("input dimension must be positive");
  }
  if (classes < 1) {
    throw UsageError("class count must be positive");
  }
  NetworkSpec spec;
  spec.layers.push_back(cov_pool());
  Eigen::Index dim = input_dim;
  const auto bire_blocks = [&](int count) {
    for (int k = 0; k < count; ++k) {
      dim = next_bimap_dim(dim);
      spec.layers.push_back(bimap(dim));
      spec.layers.push_back(reeig());
    }
    spec.layers.push_back(logeig());
    spec.layers.push_back(vectorize());
  };
  if (name == "model1") {
    bire_blocks(1);
    spec.layers.push_back(dense(2000));
  } else if (name == "model2") {
    bire_blocks(1);
    spec.layers.push_back(dense(2000));
    spec.layers.push_back(dense(128));
  } else if (name == "model3") {
    bire_blocks(2);
    spec.layers.push_back(dense(2000));
  } else if (name == "model4") {
    bire_blocks(1);
    spec.layers.push_back(dense(2000));
    spec.layers.push_back(dense(512));
  } else if (name == "bire2") {
    bire_blocks(2);
  } else if (name == "bire3") {
    bire_blocks(3);
  } else if (name == "bire4") {
    bire_blocks(4);
  } else {
    throw UsageError("unknown preset: " + name);
  }
  spec.layers.push_back(dense(classes));
  spec.layers.push_back(softmax(classes));
  validate_spec(spec, input_dim);
  return spec;
}

TrainState init_state(const NetworkSpec& spec, Eigen::Index input_dim) {
  validate_spec(spec, input_dim);
  CounterRng rng(spec.seed);
  TrainState state;
  state.params.resize(spec.layers.size());
  Eigen::Index dim = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerDesc& l = spec.layers[i];
    switch (l.kind) {
      case LayerKind::CovPool:
        dim = input_dim;
        break;
      case LayerKind::GaussPool:
        dim = input_dim + 1;
        break;
      case LayerKind::BiMap:
        state.params[i].W = random_orthogonal(rng, dim).topRows(l.units);
        dim = l.units;
        break;
      case LayerKind::Vectorize:
        dim = dim * (dim + 1) / 2;
        break;
      case LayerKind::Dense:
        state.params[i].W = 0.01 * random_gaussian_matrix(rng, l.units, dim);
        state.params[i].b = Eigen::VectorXd::Zero(l.units);
        dim = l.units;
        break;
      case LayerKind::ReEig:
      case LayerKind::LogEig:
      case LayerKind::Softmax:
        break;
    }
  }
  state.rng_counter = rng.counter();
  return state;
}

SpdMatrix pool_descriptor(const NetworkSpec& spec, const FeatureSet& input,
                          bool* regularization_ineffective) {
  if (spec.layers.empty() || !is_pooling(spec.layers.front().kind)) {
    throw UsageError("first layer must be a pooling layer");
  }
  const LayerDesc& l = spec.layers.front();
  const RegularizationParams params{l.value};
  if (l.kind == LayerKind::CovPool) {
    return regularize(compute_covariance(input), params, regularization_ineffective);
  }
  return gaussian_embed(input, params, regularization_ineffective);
}

namespace {

Prediction run_forward(const NetworkSpec& spec, const TrainState& state,
                       const FeatureSet* input, const SpdMatrix* descriptor,
                       LayerTape* tape) {
  if (state.params.size() != spec.layers.size()) {
    throw std::invalid_argument("state does not match layer stack");
  }
  if (tape != nullptr) {
    tape->entries.assign(spec.layers.size(), TapeEntry{});
    tape->pooled_input = descriptor != nullptr;
  }
  SpdMatrix spd;
  SymMatrix sym;
  Eigen::VectorXd vec;
  Prediction out;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerDesc& l = spec.layers[i];
    TapeEntry* entry = tape != nullptr ? &tape->entries[i] : nullptr;
    switch (l.kind) {
      case LayerKind::CovPool:
      case LayerKind::GaussPool:
        if (descriptor != nullptr) {
          spd = *descriptor;
        } else {
          if (entry != nullptr) {
            entry->features = input->samples;
          }
          spd = pool_descriptor(spec, *input);
        }
        break;
      case LayerKind::BiMap: {
        if (entry != nullptr) {
          entry->spd_in = spd;
        }
        spd = bimap_forward(spd, BiMapParams{state.params[i].W});
        break;
      }
      case LayerKind::ReEig: {
        auto [clamped, pair] = reeig_forward(spd.sym(), ReEigParams{l.value});
        if (entry != nullptr) {
          entry->eig = pair;
        }
        spd = std::move(clamped);
        break;
      }
      case LayerKind::LogEig: {
        auto [logged, pair] = logeig_forward(spd);
        if (entry != nullptr) {
          entry->eig = pair;
        }
        sym = std::move(logged);
        break;
      }
      case LayerKind::Vectorize:
        if (entry != nullptr) {
          entry->dim_in = sym.dim();
        }
        vec = vectorize_sym(sym);
        break;
      case LayerKind::Dense: {
        const LayerParams& p = state.params[i];
        if (p.W.cols() != vec.size()) {
          throw std::invalid_argument("dense input width mismatch");
        }
        if (entry != nullptr) {
          entry->vec_in = vec;
        }
        vec = p.W * vec + p.b;
        break;
      }
      case LayerKind::Softmax: {
        if (l.units != vec.size()) {
          throw std::invalid_argument("softmax input width mismatch");
        }
        const double top = vec.maxCoeff();
        Eigen::VectorXd exps = (vec.array() - top).exp();
        out.probabilities = exps / exps.sum();
        if (entry != nullptr) {
          entry->probs = out.probabilities;
        }
        out.probabilities.maxCoeff(&out.label);
        break;
      }
    }
  }
  return out;
}

}  // namespace

Prediction forward(const NetworkSpec& spec, const TrainState& state,
                   const FeatureSet& input, LayerTape* tape) {
  return run_forward(spec, state, &input, nullptr, tape);
}

Prediction forward_pooled(const NetworkSpec& spec, const TrainState& state,
                          const SpdMatrix& descriptor, LayerTape* tape) {
  return run_forward(spec, state, nullptr, &descriptor, tape);
}

double cross_entropy(const Eigen::VectorXd& probabilities, Eigen::Index label) {
  if (label < 0 || label >= probabilities.size()) {
    throw std::invalid_argument("label out of range");
  }
  return -std::log(probabilities[label]);
}

Gradients backward(const NetworkSpec& spec, const TrainState& state,
                   const LayerTape& tape, Eigen::Index label) {
  const std::size_t n = spec.layers.size();
  if (tape.entries.size() != n || state.params.size() != n) {
    throw std::invalid_argument("tape does not match layer stack");
  }
  if (spec.layers.back().kind != LayerKind::Softmax) {
    throw std::invalid_argument("layer stack must end with softmax");
  }
  Gradients grads;
  grads.params.resize(n);
  Eigen::VectorXd grad_vec;
  SymMatrix grad_sym;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = n - 1 - r;
    const LayerDesc& l = spec.layers[i];
    const TapeEntry& entry = tape.entries[i];
    switch (l.kind) {
      case LayerKind::Softmax: {
        grads.loss = cross_entropy(entry.probs, label);
        grad_vec = entry.probs;
        grad_vec[label] -= 1.0;
        break;
      }
      case LayerKind::Dense: {
        const LayerParams& p = state.params[i];
        grads.params[i].W = grad_vec * entry.vec_in.transpose();
        grads.params[i].b = grad_vec;
        grad_vec = p.W.transpose() * grad_vec;
        break;
      }
      case LayerKind::Vectorize:
        grad_sym = vectorize_backward(grad_vec, entry.dim_in);
        break;
      case LayerKind::LogEig:
        grad_sym = logeig_backward(grad_sym, entry.eig);
        break;
      case LayerKind::ReEig:
        grad_sym = reeig_backward(grad_sym, entry.eig, ReEigParams{l.value});
        break;
      case LayerKind::BiMap: {
        BiMapGrads bg = bimap_backward(grad_sym, entry.spd_in,
                                       BiMapParams{state.params[i].W});
        grads.params[i].W = std::move(bg.grad_weight);
        grad_sym = std::move(bg.grad_input);
        break;
      }
      case LayerKind::CovPool:
      case LayerKind::GaussPool: {
        if (tape.pooled_input) {
          grads.input = grad_sym.mat();
          break;
        }
        const FeatureSet features{entry.features};
        const RegularizationParams params{l.value};
        if (l.kind == LayerKind::CovPool) {
          grads.input =
              covariance_backward(regularize_backward(grad_sym, params), features);
        } else {
          grads.input = gaussian_embed_backward(grad_sym, features, params);
        }
        break;
      }
    }
  }
  return grads;
}

}  // namespace spdpool
