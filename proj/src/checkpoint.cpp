#include "spdpool/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <string>

#include "spdpool/wire.hpp"

namespace spdpool {

using namespace wire;

namespace {

constexpr char kMagic[4] = {'S', 'P', 'D', 'C'};
constexpr std::uint16_t kVersion = 1;

class Reader {
public:
  Reader(std::vector<unsigned char> bytes, std::string path)
      : bytes_(std::move(bytes)), path_(std::move(path)) {}

  const unsigned char* take(std::size_t count) {
    if (bytes_.size() - offset_ < count) {
      throw DataError("truncated checkpoint: " + path_);
    }
    const unsigned char* p = bytes_.data() + offset_;
    offset_ += count;
    return p;
  }

  std::uint16_t u16() { return get_u16(take(2)); }
  std::uint32_t u32() { return get_u32(take(4)); }
  std::uint64_t u64() { return get_u64(take(8)); }
  double f64() { return get_f64(take(8)); }
  unsigned char u8() { return *take(1); }

  void finish() const {
    if (offset_ != bytes_.size()) {
      throw DataError("trailing bytes in checkpoint: " + path_);
    }
  }

  std::size_t remaining() const { return bytes_.size() - offset_; }

  const std::string& path() const { return path_; }

private:
  std::vector<unsigned char> bytes_;
  std::size_t offset_ = 0;
  std::string path_;
};

Eigen::MatrixXd read_matrix(Reader& in) {
  const Eigen::Index rows = static_cast<Eigen::Index>(in.u32());
  const Eigen::Index cols = static_cast<Eigen::Index>(in.u32());
  if (static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols) >
      in.remaining() / 8) {
    throw DataError("truncated checkpoint: " + in.path());
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      m(i, j) = in.f64();
    }
  }
  return m;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const NetworkSpec& spec,
                     Eigen::Index input_dim, const TrainState& state) {
  if (state.params.size() != spec.layers.size()) {
    throw std::invalid_argument("state does not match layer stack");
  }
  std::vector<unsigned char> bytes;
  bytes.insert(bytes.end(), kMagic, kMagic + 4);
  put_u16(bytes, kVersion);
  put_u64(bytes, spec.seed);
  put_u32(bytes, static_cast<std::uint32_t>(spec.layers.size()));
  for (const LayerDesc& l : spec.layers) {
    bytes.push_back(static_cast<unsigned char>(l.kind));
    put_u64(bytes, static_cast<std::uint64_t>(l.units));
    put_f64(bytes, l.value);
  }
  put_u32(bytes, static_cast<std::uint32_t>(input_dim));
  put_u64(bytes, state.step);
  put_u64(bytes, state.epoch);
  put_f64(bytes, state.best_val_accuracy);
  put_u64(bytes, state.rng_counter);
  for (const LayerParams& p : state.params) {
    bytes.push_back(p.W.size() > 0 ? 1 : 0);
    if (p.W.size() > 0) {
      put_u32(bytes, static_cast<std::uint32_t>(p.W.rows()));
      put_u32(bytes, static_cast<std::uint32_t>(p.W.cols()));
      for (Eigen::Index j = 0; j < p.W.cols(); ++j) {
        for (Eigen::Index i = 0; i < p.W.rows(); ++i) {
          put_f64(bytes, p.W(i, j));
        }
      }
    }
    bytes.push_back(p.b.size() > 0 ? 1 : 0);
    if (p.b.size() > 0) {
      put_u32(bytes, static_cast<std::uint32_t>(p.b.size()));
      for (Eigen::Index i = 0; i < p.b.size(); ++i) {
        put_f64(bytes, p.b[i]);
      }
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

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in_stream(path, std::ios::binary);
  if (!in_stream) {
    throw DataError("cannot open: " + path.string());
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in_stream)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DataError("bad magic: " + path.string());
  }
  Reader in(std::move(bytes), path.string());
  in.take(4);
  const std::uint16_t version = in.u16();
  if (version != kVersion) {
    throw DataError("unknown checkpoint version " + std::to_string(version) + ": " +
                    path.string());
  }
  Checkpoint ckpt;
  ckpt.spec.seed = in.u64();
  const std::uint32_t layer_count = in.u32();
  for (std::uint32_t i = 0; i < layer_count; ++i) {
    LayerDesc l;
    const unsigned char kind = in.u8();
    if (kind > static_cast<unsigned char>(LayerKind::Softmax)) {
      throw DataError("unknown layer kind in checkpoint: " + path.string());
    }
    l.kind = static_cast<LayerKind>(kind);
    l.units = static_cast<Eigen::Index>(in.u64());
    l.value = in.f64();
    ckpt.spec.layers.push_back(l);
  }
  ckpt.input_dim = static_cast<Eigen::Index>(in.u32());
  ckpt.state.step = in.u64();
  ckpt.state.epoch = in.u64();
  ckpt.state.best_val_accuracy = in.f64();
  ckpt.state.rng_counter = in.u64();
  ckpt.state.params.resize(ckpt.spec.layers.size());
  for (LayerParams& p : ckpt.state.params) {
    if (in.u8() != 0) {
      p.W = read_matrix(in);
    }
    if (in.u8() != 0) {
      const Eigen::Index size = static_cast<Eigen::Index>(in.u32());
      if (static_cast<std::uint64_t>(size) > in.remaining() / 8) {
        throw DataError("truncated checkpoint: " + in.path());
      }
      p.b.resize(size);
      for (Eigen::Index i = 0; i < size; ++i) {
        p.b[i] = in.f64();
      }
    }
  }
  in.finish();
  try {
    validate_spec(ckpt.spec, ckpt.input_dim);
  } catch (const UsageError& e) {
    throw DataError("invalid checkpoint spec (" + std::string(e.what()) + "): " +
                    path.string());
  }
  return ckpt;
}

}  // namespace spdpool
