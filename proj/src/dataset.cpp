#include "spdpool/dataset.hpp"

#include "spdpool/feature_file.hpp"
#include "spdpool/pooling.hpp"

namespace spdpool {

Dataset load_dataset(const Manifest& manifest, bool pooled) {
  Dataset data;
  data.samples.reserve(manifest.entries.size());
  for (const ManifestEntry& entry : manifest.entries) {
    Sample sample;
    sample.label = entry.label;
    sample.failed = entry.failed;
    if (pooled) {
      const DescriptorRecord record = read_descriptor_file(entry.path);
      sample.failed = sample.failed || record.failed;
      if (!sample.failed) {
        sample.descriptor = record.descriptor.mat();
      }
    } else {
      const FeatureRecord record = read_feature_file(entry.path);
      sample.failed = sample.failed || record.failed;
      if (!sample.failed) {
        if (record.kind == FileKind::SpatialMap) {
          sample.features = flatten_spatial(record.to_map()).samples;
        } else {
          sample.features = record.to_sequence();
        }
      }
    }
    data.samples.push_back(std::move(sample));
  }
  return data;
}

}  // namespace spdpool
