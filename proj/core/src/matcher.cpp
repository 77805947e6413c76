#include "siamzero/matcher.hpp"

#include <algorithm>
#include <set>

namespace siamzero {

TemplateMatrix build_template_matrix(
    SiameseModel& model,
    const std::vector<std::pair<int, const NormalizedImage*>>& templates) {
  require(!templates.empty(), "build_template_matrix: no templates");
  std::set<int> ids;
  std::vector<const NormalizedImage*> images;
  TemplateMatrix m;
  for (const auto& [id, img] : templates) {
    if (!ids.insert(id).second)
      fail("build_template_matrix: duplicate class id " + std::to_string(id));
    m.class_ids.push_back(id);
    images.push_back(img);
  }
  const Tensor feats = model.embed(images_to_tensor(images), Mode::kInfer);
  m.values = feats.data;
  return m;
}

namespace {

struct Best {
  float logit = 0.0f;
  int class_id = -1;
};

/// Shared scoring loop, so cached and direct classification rank and break
/// ties identically.
void consider(Best& best, float logit, int class_id) {
  if (best.class_id < 0 || logit > best.logit ||
      (logit == best.logit && class_id < best.class_id)) {
    best.logit = logit;
    best.class_id = class_id;
  }
}

Classification finish(const Best& best) {
  return {best.class_id,
          std::clamp(sigmoid_scalar(best.logit), kProbClamp, 1.0f - kProbClamp)};
}

}  // namespace

Classification classify(std::span<const float> feature, const TemplateMatrix& m,
                        std::span<const float> head_w, float head_b) {
  require(m.rows() > 0, "classify: empty template matrix");
  Best best;
  for (int r = 0; r < m.rows(); ++r) {
    const float z = similarity_logit(
        feature, {m.row(r), static_cast<std::size_t>(kEmbedDim)}, head_w, head_b);
    consider(best, z, m.class_ids[static_cast<std::size_t>(r)]);
  }
  return finish(best);
}

Classification classify_restricted(std::span<const float> feature,
                                   const TemplateMatrix& m,
                                   std::span<const float> head_w, float head_b,
                                   const std::set<int>& allowed) {
  require(!allowed.empty(), "classify_restricted: empty allowed set");
  std::set<int> known(m.class_ids.begin(), m.class_ids.end());
  for (int id : allowed)
    if (!known.count(id))
      fail("classify_restricted: class " + std::to_string(id) +
           " is not in the template matrix");
  Best best;
  for (int r = 0; r < m.rows(); ++r) {
    const int id = m.class_ids[static_cast<std::size_t>(r)];
    if (!allowed.count(id)) continue;
    const float z = similarity_logit(
        feature, {m.row(r), static_cast<std::size_t>(kEmbedDim)}, head_w, head_b);
    consider(best, z, id);
  }
  return finish(best);
}

Classification classify_direct(
    const NormalizedImage& image,
    const std::vector<std::pair<int, const NormalizedImage*>>& templates,
    SiameseModel& model) {
  require(!templates.empty(), "classify_direct: no templates");
  const Tensor fx = model.embed(images_to_tensor({&image}), Mode::kInfer);
  const std::span<const float> feature{fx.data.data(),
                                       static_cast<std::size_t>(kEmbedDim)};
  const auto w = model.head_weight();
  const float b = model.head_bias();

  Best best;
  std::set<int> ids;
  for (const auto& [id, img] : templates) {
    if (!ids.insert(id).second)
      fail("classify_direct: duplicate class id " + std::to_string(id));
    const Tensor fc = model.embed(images_to_tensor({img}), Mode::kInfer);
    const float z = similarity_logit(
        feature, {fc.data.data(), static_cast<std::size_t>(kEmbedDim)}, w, b);
    consider(best, z, id);
  }
  return finish(best);
}

}  // namespace siamzero
