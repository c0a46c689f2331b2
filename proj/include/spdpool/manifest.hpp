#pragma once
// Dataset manifests: UTF-8 lines "path<TAB>label<TAB>failed_flag". Paths
// are resolved against the manifest's directory on load, and every
// referenced file must exist.

#include <filesystem>
#include <vector>

#include "spdpool/types.hpp"

namespace spdpool {

struct ManifestEntry {
  std::filesystem::path path;  // absolute after loading
  int label = 0;
  bool failed = false;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  Eigen::Index classes = 0;  // max label + 1
};

Manifest load_manifest(const std::filesystem::path& path);

/// Paths are written relative to the manifest's directory when possible.
void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestEntry>& entries);

}  // namespace spdpool
