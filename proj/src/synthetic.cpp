#include "spdpool/synthetic.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "spdpool/feature_file.hpp"
#include "spdpool/manifest.hpp"
#include "spdpool/random_matrix.hpp"
#include "spdpool/rng.hpp"

namespace spdpool {

namespace {

struct ClassDraws {
  Eigen::MatrixXd covariance;
  std::vector<Eigen::MatrixXd> samples;  // dim×frames each
};

void validate(const SyntheticSpec& spec) {
  if (spec.classes < 1 || spec.dim < 1 || spec.samples_per_class < 1) {
    throw UsageError("synthetic counts must be positive");
  }
  if (spec.frames < 2) {
    throw UsageError("synthetic samples need at least two frames for covariance pooling");
  }
  if (!(spec.spectrum_min > 0.0) || spec.spectrum_min > spec.spectrum_max) {
    throw UsageError("synthetic spectrum must satisfy 0 < min <= max");
  }
}

Eigen::VectorXd log_spaced_spectrum(const SyntheticSpec& spec) {
  Eigen::VectorXd d(spec.dim);
  const double hi = std::log(spec.spectrum_max);
  const double lo = std::log(spec.spectrum_min);
  for (Eigen::Index k = 0; k < spec.dim; ++k) {
    const double t = spec.dim == 1 ? 0.0
                                   : static_cast<double>(k) /
                                         static_cast<double>(spec.dim - 1);
    d[k] = std::exp(hi + (lo - hi) * t);
  }
  return d;
}

std::vector<ClassDraws> draw_all(const SyntheticSpec& spec) {
  validate(spec);
  CounterRng rng(spec.seed);
  const Eigen::VectorXd spectrum = log_spaced_spectrum(spec);
  const Eigen::VectorXd root = spectrum.cwiseSqrt();
  std::vector<ClassDraws> classes(static_cast<std::size_t>(spec.classes));
  for (ClassDraws& cls : classes) {
    const Eigen::MatrixXd q = random_orthogonal(rng, spec.dim);
    cls.covariance = SymMatrix::symmetrized(q * spectrum.asDiagonal() * q.transpose()).mat();
    const Eigen::MatrixXd transform = q * root.asDiagonal();
    cls.samples.reserve(static_cast<std::size_t>(spec.samples_per_class));
    for (Eigen::Index s = 0; s < spec.samples_per_class; ++s) {
      cls.samples.push_back(transform * random_gaussian_matrix(rng, spec.dim, spec.frames));
    }
  }
  return classes;
}

Eigen::Index train_count(const SyntheticSpec& spec) {
  return spec.samples_per_class * 4 / 5;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  const std::vector<ClassDraws> classes = draw_all(spec);
  const std::size_t split = static_cast<std::size_t>(train_count(spec));
  SyntheticData data;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    data.class_covariances.push_back(classes[c].covariance);
    for (std::size_t s = 0; s < classes[c].samples.size(); ++s) {
      Sample sample;
      sample.features = classes[c].samples[s];
      sample.label = static_cast<int>(c);
      Dataset& target = s < split ? data.train : data.val;
      target.samples.push_back(std::move(sample));
    }
  }
  return data;
}

SyntheticPaths write_synthetic(const SyntheticSpec& spec,
                               const std::filesystem::path& out_dir) {
  const std::vector<ClassDraws> classes = draw_all(spec);
  const std::size_t split = static_cast<std::size_t>(train_count(spec));
  std::filesystem::create_directories(out_dir);
  std::vector<ManifestEntry> train_entries;
  std::vector<ManifestEntry> val_entries;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    for (std::size_t s = 0; s < classes[c].samples.size(); ++s) {
      const std::filesystem::path file =
          out_dir / ("c" + std::to_string(c) + "_s" + std::to_string(s) + ".spdf");
      write_feature_file(file, record_from_sequence(classes[c].samples[s],
                                                    static_cast<std::uint32_t>(c), false));
      ManifestEntry entry{file, static_cast<int>(c), false};
      (s < split ? train_entries : val_entries).push_back(std::move(entry));
    }
  }
  SyntheticPaths paths{out_dir / "train.tsv", out_dir / "val.tsv"};
  write_manifest(paths.train_manifest, train_entries);
  write_manifest(paths.val_manifest, val_entries);
  return paths;
}

}  // namespace spdpool
