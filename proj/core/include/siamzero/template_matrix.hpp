#pragma once

#include <string>
#include <vector>

#include "siamzero/arch.hpp"
#include "siamzero/common.hpp"

namespace siamzero {

/// Stacked template embeddings: one 128-dim row per template class.
struct TemplateMatrix {
  std::vector<int> class_ids;   // aligned with rows, no duplicates
  std::vector<float> values;    // rows * kEmbedDim

  int rows() const { return static_cast<int>(class_ids.size()); }
  const float* row(int r) const {
    return values.data() + static_cast<std::size_t>(r) * kEmbedDim;
  }
};

// "SZFM" container: magic, u32 version, u32 rows, u32 cols, float32 LE
// payload (rows*cols), then u32 class-id table (rows).
void write_feature_matrix(const TemplateMatrix& m, const std::string& path);
TemplateMatrix read_feature_matrix(const std::string& path);

}  // namespace siamzero
