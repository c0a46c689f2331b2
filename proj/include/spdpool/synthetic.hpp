#pragma once
// Synthetic datasets whose classes differ only in second-order structure:
// class c draws samples f ~ N(0, Σ_c) with Σ_c = Q_c·D·Q_cᵀ, where Q_c is a
// class-specific random orthogonal basis and D a fixed log-spaced spectrum.
// Every class has zero mean, so mean pooling carries no class information
// while covariance pooling separates the classes.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "spdpool/train.hpp"
#include "spdpool/types.hpp"

namespace spdpool {

struct SyntheticSpec {
  Eigen::Index classes = 3;
  Eigen::Index dim = 16;
  Eigen::Index samples_per_class = 100;
  Eigen::Index frames = 64;  // feature vectors per sample
  std::uint64_t seed = 0;
  double spectrum_min = 0.1;  // smallest covariance eigenvalue
  double spectrum_max = 10.0; // largest covariance eigenvalue
};

struct SyntheticData {
  Dataset train;
  Dataset val;
  std::vector<Eigen::MatrixXd> class_covariances;  // the true Σ_c
};

/// Deterministic per seed. Draw order: for each class, first the d×d
/// Gaussian block behind Q_c, then each sample's d×frames Gaussian block,
/// classes and samples in index order. The first 4/5 of each class's
/// samples (rounded down) form the training split.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

struct SyntheticPaths {
  std::filesystem::path train_manifest;
  std::filesystem::path val_manifest;
};

/// Writes one temporal-sequence file per sample (c<class>_s<sample>.spdf)
/// plus train.tsv and val.tsv manifests under out_dir. Single writer,
/// byte-identical across runs with the same spec.
SyntheticPaths write_synthetic(const SyntheticSpec& spec,
                               const std::filesystem::path& out_dir);

}  // namespace spdpool
