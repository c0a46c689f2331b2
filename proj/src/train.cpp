#include "spdpool/train.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spdpool/parallel.hpp"
#include "spdpool/rng.hpp"
#include "spdpool/stiefel.hpp"

namespace spdpool {

namespace {

void check_labels(const Dataset& data, Eigen::Index classes, const char* which) {
  for (const Sample& s : data.samples) {
    if (s.failed) {
      continue;
    }
    if (s.label < 0 || s.label >= classes) {
      throw DataError(std::string("label out of range in ") + which + " set");
    }
  }
}

/// Raw feature dimension implied by the first usable sample. A pooled
/// Gaussian-embedding descriptor has side d+1 for raw dimension d.
Eigen::Index dataset_input_dim(const NetworkSpec& spec, const Dataset& data) {
  const bool gauss = spec.layers.front().kind == LayerKind::GaussPool;
  for (const Sample& s : data.samples) {
    if (s.failed) {
      continue;
    }
    if (s.pooled()) {
      return gauss ? s.descriptor.rows() - 1 : s.descriptor.rows();
    }
    return s.features.rows();
  }
  throw DataError("no usable samples to infer the feature dimension");
}

SpdMatrix sample_descriptor(const NetworkSpec& spec, const Sample& s) {
  if (s.pooled()) {
    return SpdMatrix::assume_spd(SymMatrix::symmetrized(s.descriptor));
  }
  return pool_descriptor(spec, FeatureSet{s.features});
}

void fisher_yates(std::vector<std::size_t>& order, CounterRng& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(order[i - 1], order[j]);
  }
}

}  // namespace

Eigen::Index count_classes(const Dataset& data) {
  Eigen::Index classes = 0;
  for (const Sample& s : data.samples) {
    if (!s.failed && s.label >= 0) {
      classes = std::max<Eigen::Index>(classes, s.label + 1);
    }
  }
  return classes;
}

TrainResult train(const NetworkSpec& spec, const TrainConfig& config,
                  const Dataset& train_data, const Dataset& val_data) {
  if (config.learning_rate < 0.0) {
    throw UsageError("learning rate must be nonnegative");
  }
  if (config.epochs < 0) {
    throw UsageError("epoch count must be nonnegative");
  }
  if (config.batch_size < 1) {
    throw UsageError("batch size must be positive");
  }
  if (train_data.samples.empty() || val_data.samples.empty()) {
    throw DataError("training and validation sets must be nonempty");
  }
  const Eigen::Index classes = spec_classes(spec);
  check_labels(train_data, classes, "training");
  check_labels(val_data, classes, "validation");

  const Eigen::Index input_dim = dataset_input_dim(spec, train_data);
  TrainResult result;
  result.state = init_state(spec, input_dim);
  TrainState& state = result.state;
  CounterRng rng(spec.seed, state.rng_counter);

  // Descriptors are pooled once up front; training then runs entirely on
  // the descriptor path, so precomputed and inline pooling share the exact
  // same arithmetic.
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < train_data.samples.size(); ++i) {
    if (!train_data.samples[i].failed) {
      usable.push_back(i);
    }
  }
  if (usable.empty()) {
    throw DataError("no trainable samples");
  }
  std::vector<SpdMatrix> descriptors(train_data.samples.size());
  parallel_for(usable.size(), [&](std::size_t k) {
    const std::size_t i = usable[k];
    descriptors[i] = sample_descriptor(spec, train_data.samples[i]);
  });

  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  for (Eigen::Index epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order = usable;
    if (config.shuffle) {
      fisher_yates(order, rng);
    }
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t count = std::min(batch, order.size() - start);
      const std::uint64_t stepping = state.step + 1;  // 1-based step in flight
      std::vector<Gradients> grads(count);
      try {
        parallel_for(count, [&](std::size_t k) {
          const std::size_t i = order[start + k];
          LayerTape tape;
          forward_pooled(spec, state, descriptors[i], &tape);
          grads[k] = backward(spec, state, tape, train_data.samples[i].label);
        });
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " at step " +
                             std::to_string(stepping));
      }

      // Sequential reduction in batch order keeps results independent of
      // the worker count.
      const double scale = 1.0 / static_cast<double>(count);
      double batch_loss = 0.0;
      Gradients total = std::move(grads[0]);
      batch_loss += total.loss;
      for (std::size_t k = 1; k < count; ++k) {
        batch_loss += grads[k].loss;
        for (std::size_t li = 0; li < total.params.size(); ++li) {
          if (grads[k].params[li].W.size() > 0) {
            total.params[li].W += grads[k].params[li].W;
          }
          if (grads[k].params[li].b.size() > 0) {
            total.params[li].b += grads[k].params[li].b;
          }
        }
      }
      batch_loss *= scale;
      if (!std::isfinite(batch_loss)) {
        throw NumericalError("non-finite loss at step " + std::to_string(stepping));
      }
      loss_sum += batch_loss * static_cast<double>(count);

      if (config.learning_rate != 0.0) {
        for (std::size_t li = 0; li < spec.layers.size(); ++li) {
          LayerParams& p = state.params[li];
          switch (spec.layers[li].kind) {
            case LayerKind::BiMap:
              p.W = stiefel_step(p.W, scale * total.params[li].W, config.learning_rate);
              break;
            case LayerKind::Dense:
              p.W -= config.learning_rate * scale * total.params[li].W;
              p.b -= config.learning_rate * scale * total.params[li].b;
              break;
            default:
              break;
          }
        }
      }
      ++state.step;
      state.rng_counter = rng.counter();
      if (config.on_step) {
        config.on_step(state);
      }
    }
    state.epoch = static_cast<std::uint64_t>(epoch);
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(order.size());
    record.val_accuracy = evaluate(spec, state, val_data);
    state.best_val_accuracy = std::max(state.best_val_accuracy, record.val_accuracy);
    result.history.push_back(record);
  }
  state.rng_counter = rng.counter();
  return result;
}

double evaluate(const NetworkSpec& spec, const TrainState& state, const Dataset& data) {
  if (data.samples.empty()) {
    throw DataError("evaluation set must be nonempty");
  }
  const Eigen::Index classes = spec_classes(spec);
  check_labels(data, classes, "evaluation");
  std::vector<double> credit(data.samples.size(), 0.0);
  parallel_for(data.samples.size(), [&](std::size_t i) {
    const Sample& s = data.samples[i];
    if (s.failed) {
      credit[i] = 1.0 / static_cast<double>(classes);
      return;
    }
    const Prediction p = forward_pooled(spec, state, sample_descriptor(spec, s));
    credit[i] = p.label == s.label ? 1.0 : 0.0;
  });
  double sum = 0.0;
  for (const double c : credit) {
    sum += c;
  }
  return sum / static_cast<double>(data.samples.size());
}

}  // namespace spdpool
