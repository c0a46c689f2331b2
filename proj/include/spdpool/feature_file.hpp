#pragma once
// Binary feature-tensor files. Layout, all integers little-endian: magic
// "SPDF", u16 version (currently 1), u8 kind code, u8 scalar code, four u32
// dims with unused trailing dims zero, u32 label (0xFFFFFFFF = unlabeled),
// u8 failed flag, then the payload as little-endian IEEE values.
//
// kind 0, spatial map: dims = (width, height, channels, 0); payload runs
// position by position in row-major order, the channel values of one
// position stored contiguously.
// kind 1, temporal sequence: dims = (frames, dim, 0, 0); payload runs frame
// by frame, each frame's values contiguous.
//
// 32-bit payloads are widened to double on read; writing narrows with
// round-to-nearest. Descriptor files reuse the spatial-map kind with
// width = height = 1 and channels = d·d (column-major values of a d×d
// symmetric matrix), always stored 64-bit so a descriptor round-trip is
// bit-exact.

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "spdpool/types.hpp"

namespace spdpool {

enum class FileKind : std::uint8_t { SpatialMap = 0, TemporalSequence = 1 };
enum class ScalarWidth : std::uint8_t { F32 = 0, F64 = 1 };

inline constexpr std::uint32_t kNoLabel = 0xFFFFFFFFu;

struct FeatureRecord {
  FileKind kind = FileKind::SpatialMap;
  ScalarWidth scalar = ScalarWidth::F64;
  std::array<std::uint32_t, 4> dims{};
  std::vector<double> values;
  std::uint32_t label = kNoLabel;
  bool failed = false;

  /// Validated view as a feature map (kind must be spatial-map).
  FeatureMap to_map() const;

  /// Validated dim×frames view (kind must be temporal-sequence).
  Eigen::MatrixXd to_sequence() const;
};

FeatureRecord record_from_map(const FeatureMap& map, std::uint32_t label, bool failed,
                              ScalarWidth scalar = ScalarWidth::F64);

/// frames is dim×count, one frame per column.
FeatureRecord record_from_sequence(const Eigen::MatrixXd& frames, std::uint32_t label,
                                   bool failed, ScalarWidth scalar = ScalarWidth::F64);

void write_feature_file(const std::filesystem::path& path, const FeatureRecord& record);

/// Throws DataError with distinct messages for a bad magic tag, an unknown
/// version, and a truncated payload.
FeatureRecord read_feature_file(const std::filesystem::path& path);

void write_descriptor_file(const std::filesystem::path& path, const SymMatrix& descriptor,
                           std::uint32_t label, bool failed);

struct DescriptorRecord {
  SymMatrix descriptor;
  std::uint32_t label = kNoLabel;
  bool failed = false;
};

DescriptorRecord read_descriptor_file(const std::filesystem::path& path);

}  // namespace spdpool
