#pragma once

#include <set>
#include <span>
#include <vector>

#include "siamzero/model.hpp"
#include "siamzero/template_matrix.hpp"

namespace siamzero {

struct Classification {
  int class_id = -1;
  float probability = 0.0f;
};

/// Embeds every template in infer mode and stacks the features row by row.
TemplateMatrix build_template_matrix(
    SiameseModel& model,
    const std::vector<std::pair<int, const NormalizedImage*>>& templates);

/// argmax over sigma(w |f - F_row| + b); ranking happens on the pre-sigmoid
/// score (sigma is strictly increasing), ties take the lowest class id.
Classification classify(std::span<const float> feature, const TemplateMatrix& m,
                        std::span<const float> head_w, float head_b);

/// Same argmax restricted to the given class ids, which must all be rows.
Classification classify_restricted(std::span<const float> feature,
                                   const TemplateMatrix& m,
                                   std::span<const float> head_w, float head_b,
                                   const std::set<int>& allowed);

/// Per-pair evaluation path without the feature cache; returns the identical
/// class and bit-identical probability as classify over a matrix built from
/// the same model.
Classification classify_direct(
    const NormalizedImage& image,
    const std::vector<std::pair<int, const NormalizedImage*>>& templates,
    SiameseModel& model);

}  // namespace siamzero
