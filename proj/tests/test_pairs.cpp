#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "siamzero/pairs.hpp"

using namespace siamzero;

TEST_CASE("pairs: single class yields only positives") {
  for (int n : {0, 1, 5}) {
    const PairList pairs = generate_pairs({4}, n, 1);
    CHECK(pairs.records.size() == 4);
    for (const auto& r : pairs.records) {
      CHECK(r.label == 1);
      CHECK(r.template_class == 0);
      CHECK(r.sample_class == 0);
    }
  }
}

TEST_CASE("pairs: c=3, m=2, n=1 enumerates to 6 positives + 6 negatives") {
  const PairList pairs = generate_pairs({2, 2, 2}, 1, 7);
  CHECK(pairs.records.size() == 12);

  // enumeration oracle: replay the generation rules by hand
  std::multiset<std::tuple<int, int, int>> positives, expected_positives;
  int negatives = 0;
  std::map<std::pair<int, int>, int> negatives_per_cell;
  for (const auto& r : pairs.records) {
    CHECK((r.label == 0 || r.label == 1));
    CHECK((r.label == 1) == (r.template_class == r.sample_class));
    if (r.label == 1) {
      positives.insert({r.template_class, r.sample_class, r.sample_index});
    } else {
      ++negatives;
      negatives_per_cell[{r.template_class, r.sample_class}]++;
    }
  }
  for (int i = 0; i < 3; ++i)
    for (int x = 0; x < 2; ++x) expected_positives.insert({i, i, x});
  CHECK(positives == expected_positives);
  CHECK(negatives == 6);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(negatives_per_cell[{i, j}] == 1);
}

TEST_CASE("pairs: uniform m=n sizes reproduce the n*c^2 total") {
  for (int c : {2, 5, 10}) {
    for (int n : {1, 3}) {
      const std::vector<int> sizes(static_cast<std::size_t>(c), n);
      const PairList pairs = generate_pairs(sizes, n, 99);
      CHECK(static_cast<int>(pairs.records.size()) == n * c * c);
      const auto [pos, neg] = pair_counts(sizes, n);
      CHECK(pos + neg == n * c * c);
    }
  }
}

TEST_CASE("pairs: closed-form counts match the generated partition") {
  const std::vector<int> sizes = {3, 5, 2, 4};
  const int n = 2;
  const auto [pos, neg] = pair_counts(sizes, n);
  CHECK(pos == 14);
  CHECK(neg == 4 * 3 * 2);

  const PairList pairs = generate_pairs(sizes, n, 5);
  std::int64_t got_pos = 0, got_neg = 0;
  for (const auto& r : pairs.records) (r.label ? got_pos : got_neg)++;
  CHECK(got_pos == pos);
  CHECK(got_neg == neg);

  CHECK(pair_counts({7}, 3) == std::pair<std::int64_t, std::int64_t>{7, 0});
  CHECK(pair_counts(std::vector<int>(10, 5), 5).first +
            pair_counts(std::vector<int>(10, 5), 5).second ==
        500);
}

TEST_CASE("pairs: negative draws are distinct within each cell") {
  const PairList pairs = generate_pairs({6, 6, 6}, 4, 3);
  std::map<std::pair<int, int>, std::set<int>> cells;
  for (const auto& r : pairs.records) {
    if (r.label) continue;
    CHECK(cells[{r.template_class, r.sample_class}].insert(r.sample_index).second);
  }
  for (const auto& [cell, idx] : cells) CHECK(idx.size() == 4);
}

TEST_CASE("pairs: no negative pairs a template with its own class") {
  const PairList pairs = generate_pairs({5, 5, 5, 5}, 2, 11);
  for (const auto& r : pairs.records)
    if (r.label == 0) CHECK(r.template_class != r.sample_class);
}

TEST_CASE("pairs: generation is deterministic in (sizes, n, seed)") {
  const std::vector<int> sizes = {4, 6, 5};
  const PairList a = generate_pairs(sizes, 2, 42);
  const PairList b = generate_pairs(sizes, 2, 42);
  CHECK(a.records == b.records);
  const PairList c = generate_pairs(sizes, 2, 43);
  CHECK(a.records != c.records);
}

TEST_CASE("pairs: error when a class is empty or smaller than n") {
  CHECK_THROWS_WITH_AS(generate_pairs({3, 0, 3}, 1, 1),
                       doctest::Contains("empty"), Error);
  CHECK_THROWS_WITH_AS(generate_pairs({3, 2, 3}, 3, 1),
                       doctest::Contains("fewer than n"), Error);
  // a single class never draws negatives, so any n is fine
  CHECK_NOTHROW(generate_pairs({2}, 10, 1));
}

TEST_CASE("reshuffle: epoch-keyed permutation of the same multiset") {
  const PairList pairs = generate_pairs({5, 5, 5}, 2, 17);
  const PairList e0a = reshuffle(pairs, 0);
  const PairList e0b = reshuffle(pairs, 0);
  CHECK(e0a.records == e0b.records);

  const PairList e1 = reshuffle(pairs, 1);
  CHECK(e0a.records != e1.records);

  const auto canonical = [](PairList p) {
    std::sort(p.records.begin(), p.records.end(),
              [](const PairRecord& a, const PairRecord& b) {
                return std::tie(a.template_class, a.sample_class, a.sample_index,
                                a.label) < std::tie(b.template_class, b.sample_class,
                                                    b.sample_index, b.label);
              });
    return p.records;
  };
  CHECK(canonical(e0a) == canonical(e1));
  CHECK(canonical(e0a) == canonical(pairs));
}
