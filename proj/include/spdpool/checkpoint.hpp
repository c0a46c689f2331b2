#pragma once
// Model checkpoints. Layout, little-endian: magic "SPDC", u16 version
// (currently 1), u64 spec seed, u32 layer count, per layer {u8 kind,
// u64 units, f64 value}, u32 input dimension, u64 step, u64 epoch,
// f64 best validation accuracy, u64 rng counter, then per layer
// {u8 has_W, u32 rows, u32 cols, column-major f64 data} and
// {u8 has_b, u32 size, f64 data}.

#include <filesystem>

#include "spdpool/network.hpp"

namespace spdpool {

struct Checkpoint {
  NetworkSpec spec;
  Eigen::Index input_dim = 0;
  TrainState state;
};

void save_checkpoint(const std::filesystem::path& path, const NetworkSpec& spec,
                     Eigen::Index input_dim, const TrainState& state);

/// Validates magic, version, and payload size; the restored spec is
/// re-validated against the stored input dimension.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace spdpool
