#include "siamzero/pairs.hpp"

#include <fstream>

namespace siamzero {

PairList generate_pairs(const std::vector<int>& class_sizes, int n,
                        std::uint64_t seed) {
  const int c = static_cast<int>(class_sizes.size());
  require(c >= 1, "generate_pairs: need at least one class");
  require(n >= 0, "generate_pairs: n must be >= 0");
  for (int j = 0; j < c; ++j) {
    if (class_sizes[static_cast<std::size_t>(j)] <= 0)
      fail("generate_pairs: class " + std::to_string(j) + " is empty");
    if (c > 1 && class_sizes[static_cast<std::size_t>(j)] < n)
      fail("generate_pairs: class " + std::to_string(j) + " has " +
           std::to_string(class_sizes[static_cast<std::size_t>(j)]) +
           " samples, fewer than n=" + std::to_string(n) +
           " (sampling without replacement)");
  }

  Rng rng(seed);
  PairList out;
  out.seed = seed;
  out.negatives_per_cell = n;
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < c; ++j) {
      if (i == j) {
        for (int x = 0; x < class_sizes[static_cast<std::size_t>(j)]; ++x)
          out.records.push_back({i, j, x, 1});
      } else {
        const auto picks =
            rng.sample_without_replacement(class_sizes[static_cast<std::size_t>(j)], n);
        for (int x : picks) out.records.push_back({i, j, x, 0});
      }
    }
  }
  rng.shuffle(out.records);
  return out;
}

std::pair<std::int64_t, std::int64_t> pair_counts(
    const std::vector<int>& class_sizes, int n) {
  const std::int64_t c = static_cast<std::int64_t>(class_sizes.size());
  std::int64_t positives = 0;
  for (int m : class_sizes) positives += m;
  return {positives, c * (c - 1) * n};
}

PairList reshuffle(const PairList& pairs, std::int64_t epoch) {
  PairList out = pairs;
  Rng rng(mix_seed(pairs.seed, static_cast<std::uint64_t>(epoch) + 0x5a5aULL));
  rng.shuffle(out.records);
  return out;
}

void write_pairs_tsv(const PairList& pairs, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(path + ": cannot open for writing");
  out << "# seed=" << pairs.seed << " n=" << pairs.negatives_per_cell << "\n";
  for (const auto& r : pairs.records)
    out << r.template_class << '\t' << r.sample_class << '\t' << r.sample_index
        << '\t' << r.label << '\n';
  out.flush();
  if (!out) fail(path + ": write failed");
}

}  // namespace siamzero
