#include "spdpool/feature_file.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "spdpool/wire.hpp"

namespace spdpool {

using namespace wire;

namespace {

constexpr char kMagic[4] = {'S', 'P', 'D', 'F'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 2 + 1 + 1 + 4 * 4 + 4 + 1;

std::uint64_t payload_count(const FeatureRecord& record) {
  std::uint64_t count = 1;
  const int used = record.kind == FileKind::SpatialMap ? 3 : 2;
  for (int i = 0; i < used; ++i) {
    const std::uint64_t d = record.dims[static_cast<std::size_t>(i)];
    if (d != 0 && count > std::numeric_limits<std::uint64_t>::max() / d) {
      throw DataError("dims exceed supported range");
    }
    count *= d;
  }
  return count;
}

void check_record(const FeatureRecord& record) {
  const int used = record.kind == FileKind::SpatialMap ? 3 : 2;
  for (int i = used; i < 4; ++i) {
    if (record.dims[static_cast<std::size_t>(i)] != 0) {
      throw DataError("unused dims must be zero");
    }
  }
  if (payload_count(record) != record.values.size()) {
    throw DataError("payload length does not match dims");
  }
}

}  // namespace

FeatureMap FeatureRecord::to_map() const {
  if (kind != FileKind::SpatialMap) {
    throw DataError("record is not a spatial map");
  }
  constexpr std::uint32_t cap = static_cast<std::uint32_t>(std::numeric_limits<int>::max());
  if (dims[0] > cap || dims[1] > cap || dims[2] > cap) {
    throw DataError("dims exceed supported range");
  }
  try {
    return make_feature_map(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                            static_cast<int>(dims[2]), values);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
}

Eigen::MatrixXd FeatureRecord::to_sequence() const {
  if (kind != FileKind::TemporalSequence) {
    throw DataError("record is not a temporal sequence");
  }
  const Eigen::Index frames = static_cast<Eigen::Index>(dims[0]);
  const Eigen::Index dim = static_cast<Eigen::Index>(dims[1]);
  if (frames < 1 || dim < 1) {
    throw DataError("temporal sequence dims must be positive");
  }
  return Eigen::Map<const Eigen::MatrixXd>(values.data(), dim, frames);
}

FeatureRecord record_from_map(const FeatureMap& map, std::uint32_t label, bool failed,
                              ScalarWidth scalar) {
  FeatureRecord record;
  record.kind = FileKind::SpatialMap;
  record.scalar = scalar;
  record.dims = {static_cast<std::uint32_t>(map.width), static_cast<std::uint32_t>(map.height),
                 static_cast<std::uint32_t>(map.channels), 0};
  record.values = map.values;
  record.label = label;
  record.failed = failed;
  return record;
}

FeatureRecord record_from_sequence(const Eigen::MatrixXd& frames, std::uint32_t label,
                                   bool failed, ScalarWidth scalar) {
  FeatureRecord record;
  record.kind = FileKind::TemporalSequence;
  record.scalar = scalar;
  record.dims = {static_cast<std::uint32_t>(frames.cols()),
                 static_cast<std::uint32_t>(frames.rows()), 0, 0};
  record.values.assign(frames.data(), frames.data() + frames.size());
  record.label = label;
  record.failed = failed;
  return record;
}

void write_feature_file(const std::filesystem::path& path, const FeatureRecord& record) {
  check_record(record);
  std::vector<unsigned char> bytes;
  bytes.reserve(kHeaderSize + record.values.size() * 8);
  bytes.insert(bytes.end(), kMagic, kMagic + 4);
  put_u16(bytes, kVersion);
  bytes.push_back(static_cast<unsigned char>(record.kind));
  bytes.push_back(static_cast<unsigned char>(record.scalar));
  for (const std::uint32_t d : record.dims) {
    put_u32(bytes, d);
  }
  put_u32(bytes, record.label);
  bytes.push_back(record.failed ? 1 : 0);
  if (record.scalar == ScalarWidth::F64) {
    for (const double v : record.values) {
      std::uint64_t raw = 0;
      std::memcpy(&raw, &v, 8);
      put_u64(bytes, raw);
    }
  } else {
    for (const double v : record.values) {
      const float narrowed = static_cast<float>(v);
      std::uint32_t raw = 0;
      std::memcpy(&raw, &narrowed, 4);
      put_u32(bytes, raw);
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("cannot open for writing: " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw DataError("write failed: " + path.string());
  }
}

FeatureRecord read_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open: " + path.string());
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DataError("bad magic: " + path.string());
  }
  if (bytes.size() < kHeaderSize) {
    throw DataError("truncated payload: " + path.string());
  }
  const std::uint16_t version = get_u16(bytes.data() + 4);
  if (version != kVersion) {
    throw DataError("unknown version " + std::to_string(version) + ": " + path.string());
  }
  FeatureRecord record;
  const unsigned char kind = bytes[6];
  if (kind > 1) {
    throw DataError("unknown kind code: " + path.string());
  }
  record.kind = static_cast<FileKind>(kind);
  const unsigned char scalar = bytes[7];
  if (scalar > 1) {
    throw DataError("unknown scalar code: " + path.string());
  }
  record.scalar = static_cast<ScalarWidth>(scalar);
  for (std::size_t i = 0; i < 4; ++i) {
    record.dims[i] = get_u32(bytes.data() + 8 + 4 * i);
  }
  record.label = get_u32(bytes.data() + 24);
  record.failed = bytes[28] != 0;
  const std::uint64_t count = payload_count(record);
  const std::uint64_t width = record.scalar == ScalarWidth::F64 ? 8 : 4;
  const std::uint64_t available = bytes.size() - kHeaderSize;
  if (count > available / width) {
    throw DataError("truncated payload: " + path.string());
  }
  if (count * width < available) {
    throw DataError("trailing bytes after payload: " + path.string());
  }
  record.values.resize(count);
  const unsigned char* p = bytes.data() + kHeaderSize;
  if (record.scalar == ScalarWidth::F64) {
    for (double& v : record.values) {
      const std::uint64_t raw = get_u64(p);
      std::memcpy(&v, &raw, 8);
      p += 8;
    }
  } else {
    for (double& v : record.values) {
      const std::uint32_t raw = get_u32(p);
      float narrow = 0.0f;
      std::memcpy(&narrow, &raw, 4);
      v = static_cast<double>(narrow);
      p += 4;
    }
  }
  check_record(record);
  return record;
}

void write_descriptor_file(const std::filesystem::path& path, const SymMatrix& descriptor,
                           std::uint32_t label, bool failed) {
  const Eigen::Index d = descriptor.dim();
  FeatureRecord record;
  record.kind = FileKind::SpatialMap;
  record.scalar = ScalarWidth::F64;
  record.dims = {1, 1, static_cast<std::uint32_t>(d * d), 0};
  record.values.assign(descriptor.mat().data(), descriptor.mat().data() + d * d);
  record.label = label;
  record.failed = failed;
  write_feature_file(path, record);
}

DescriptorRecord read_descriptor_file(const std::filesystem::path& path) {
  const FeatureRecord record = read_feature_file(path);
  if (record.kind != FileKind::SpatialMap || record.dims[0] != 1 || record.dims[1] != 1) {
    throw DataError("not a descriptor file (expected 1x1 spatial map): " + path.string());
  }
  const auto side = static_cast<Eigen::Index>(
      std::llround(std::sqrt(static_cast<double>(record.dims[2]))));
  if (side < 1 || static_cast<std::uint32_t>(side * side) != record.dims[2]) {
    throw DataError("descriptor channel count is not a perfect square: " + path.string());
  }
  const Eigen::MatrixXd m =
      Eigen::Map<const Eigen::MatrixXd>(record.values.data(), side, side);
  DescriptorRecord out;
  try {
    out.descriptor = SymMatrix::from_symmetric(m);
  } catch (const std::invalid_argument&) {
    throw DataError("descriptor matrix is not symmetric: " + path.string());
  } catch (const NumericalError&) {
    throw DataError("descriptor matrix has non-finite entries: " + path.string());
  }
  out.label = record.label;
  out.failed = record.failed;
  return out;
}

}  // namespace spdpool
