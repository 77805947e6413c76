#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "siamzero/common.hpp"

namespace siamzero {

/// One training unit: a template class against one sample, with the
/// same-class label. label == 1 iff template_class == sample_class.
struct PairRecord {
  int template_class = 0;
  int sample_class = 0;
  int sample_index = 0;  // index into the class's sample list
  int label = 0;

  bool operator==(const PairRecord&) const = default;
};

struct PairList {
  std::vector<PairRecord> records;
  std::uint64_t seed = 0;
  int negatives_per_cell = 0;  // the n of the generation rules
};

/// Deterministic pair generation: for every template class i, every sample
/// of class i as a positive; for every other class j, exactly n distinct
/// samples of j as negatives; the whole list is then shuffled by the seeded
/// rng. class_sizes[j] = |D[j]|. Errors when any class is empty or, with
/// more than one class, smaller than n.
PairList generate_pairs(const std::vector<int>& class_sizes, int n,
                        std::uint64_t seed);

/// Closed-form (positives, negatives): (sum_i |D[i]|, c*(c-1)*n).
std::pair<std::int64_t, std::int64_t> pair_counts(
    const std::vector<int>& class_sizes, int n);

/// Same multiset, epoch-keyed deterministic permutation.
PairList reshuffle(const PairList& pairs, std::int64_t epoch);

/// TSV with a "# seed=<seed> n=<n>" header line.
void write_pairs_tsv(const PairList& pairs, const std::string& path);

}  // namespace siamzero
