#pragma once
// Bridges manifests and feature files to in-memory datasets. The manifest's
// label is authoritative; a sample counts as failed when either the
// manifest or the file flags it.

#include "spdpool/manifest.hpp"
#include "spdpool/train.hpp"

namespace spdpool {

/// Loads every entry. With pooled = false, files hold raw features (spatial
/// maps are flattened to position vectors); with pooled = true, files hold
/// precomputed descriptors.
Dataset load_dataset(const Manifest& manifest, bool pooled);

}  // namespace spdpool
