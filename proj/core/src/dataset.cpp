#include "siamzero/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <numeric>

#include "siamzero/manifest.hpp"
#include "siamzero/pgm.hpp"

namespace siamzero {

std::vector<int> Dataset::class_ids() const {
  std::vector<int> ids(static_cast<std::size_t>(num_classes()));
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

std::vector<int> Dataset::class_sizes() const {
  std::vector<int> sizes;
  for (const auto& s : samples) sizes.push_back(static_cast<int>(s.size()));
  return sizes;
}

Dataset load_dataset(const std::string& dir, const std::string& manifest_name,
                     const std::string& templates_name, int threshold) {
  namespace fs = std::filesystem;
  const Manifest samples_m = load_manifest((fs::path(dir) / manifest_name).string());
  const Manifest templates_m =
      load_manifest((fs::path(dir) / templates_name).string());

  const int c = samples_m.num_classes();
  Dataset data;
  data.samples.resize(static_cast<std::size_t>(c));
  data.sample_refs.resize(static_cast<std::size_t>(c));
  data.templates.resize(static_cast<std::size_t>(c));

  for (const auto& e : samples_m.entries) {
    const std::string p = (fs::path(dir) / e.path).string();
    data.samples[static_cast<std::size_t>(e.class_id)].push_back(
        preprocess(load_pgm(p), threshold));
    data.sample_refs[static_cast<std::size_t>(e.class_id)].push_back(e.path);
  }

  std::vector<bool> has_template(static_cast<std::size_t>(c), false);
  for (const auto& e : templates_m.entries) {
    if (e.class_id >= c)
      fail(templates_name + ": template class " + std::to_string(e.class_id) +
           " outside the sample class range [0, " + std::to_string(c) + ")");
    if (has_template[static_cast<std::size_t>(e.class_id)])
      fail(templates_name + ": duplicate template for class " +
           std::to_string(e.class_id));
    has_template[static_cast<std::size_t>(e.class_id)] = true;
    const std::string p = (fs::path(dir) / e.path).string();
    data.templates[static_cast<std::size_t>(e.class_id)] =
        preprocess(load_pgm(p), threshold);
  }
  for (int i = 0; i < c; ++i)
    if (!has_template[static_cast<std::size_t>(i)])
      fail(templates_name + ": no template for class " + std::to_string(i));
  return data;
}

DataSplit make_split(const Dataset& data, int c_seen, std::uint64_t seed,
                     float train_frac) {
  require(train_frac > 0.0f && train_frac <= 1.0f,
          "make_split: train_frac must be in (0, 1]");
  DataSplit split;
  split.classes = split_charset(data.class_ids(), c_seen, seed);
  split.train_frac = train_frac;
  split.train_indices.resize(static_cast<std::size_t>(data.num_classes()));
  split.test_indices.resize(static_cast<std::size_t>(data.num_classes()));
  for (int cls = 0; cls < data.num_classes(); ++cls) {
    const int m = static_cast<int>(data.samples[static_cast<std::size_t>(cls)].size());
    int n_train = static_cast<int>(std::lround(m * static_cast<double>(train_frac)));
    n_train = std::min(std::max(n_train, 1), m);
    for (int i = 0; i < m; ++i) {
      if (i < n_train)
        split.train_indices[static_cast<std::size_t>(cls)].push_back(i);
      else
        split.test_indices[static_cast<std::size_t>(cls)].push_back(i);
    }
  }
  return split;
}

}  // namespace siamzero
