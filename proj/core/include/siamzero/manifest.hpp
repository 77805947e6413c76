#pragma once

#include <string>
#include <vector>

#include "siamzero/common.hpp"

namespace siamzero {

struct ManifestEntry {
  std::string path;  // relative image path
  int class_id = 0;
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  /// Number of classes; after a strict load the ids form exactly [0, C).
  int num_classes() const;
};

/// Parses a TSV manifest, one "path<TAB>classid" line per entry.
/// strict additionally requires class ids to cover [0, C) without gaps.
Manifest load_manifest(const std::string& path, bool strict = true);

void save_manifest(const Manifest& m, const std::string& path);

}  // namespace siamzero
