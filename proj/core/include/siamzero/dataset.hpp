#pragma once

#include <string>
#include <vector>

#include "siamzero/prep.hpp"
#include "siamzero/split.hpp"

namespace siamzero {

/// In-memory dataset: preprocessed samples grouped by class, plus one
/// preprocessed template per class. Templates run through the same
/// preprocessing pipeline as samples.
struct Dataset {
  std::vector<std::vector<NormalizedImage>> samples;    // [class][sample]
  std::vector<std::vector<std::string>> sample_refs;    // source paths
  std::vector<NormalizedImage> templates;               // [class]

  int num_classes() const { return static_cast<int>(samples.size()); }
  std::vector<int> class_ids() const;
  std::vector<int> class_sizes() const;
};

/// Loads PGM images named by the two manifests (paths relative to dir) and
/// preprocesses everything. The template manifest must cover every class
/// exactly once.
Dataset load_dataset(const std::string& dir, const std::string& manifest_name,
                     const std::string& templates_name, int threshold = 0);

/// Class split plus a deterministic per-class train/test sample split (the
/// first round(m * train_frac) samples train, the rest test).
struct DataSplit {
  SplitSpec classes;
  float train_frac = 0.75f;
  std::vector<std::vector<int>> train_indices;  // per class
  std::vector<std::vector<int>> test_indices;
};

DataSplit make_split(const Dataset& data, int c_seen, std::uint64_t seed,
                     float train_frac = 0.75f);

}  // namespace siamzero
