#include "siamzero/split.hpp"

#include <algorithm>

namespace siamzero {

SplitSpec split_charset(const std::vector<int>& charset, int c_seen,
                        std::uint64_t seed) {
  const int c = static_cast<int>(charset.size());
  require(c >= 1, "split_charset: empty charset");
  // c_seen == c is the closed-set configuration (unseen side empty).
  if (c_seen < 1 || c_seen > c)
    fail("split_charset: c_seen=" + std::to_string(c_seen) +
         " out of range [1, " + std::to_string(c) + "]");

  std::vector<int> ids = charset;
  std::sort(ids.begin(), ids.end());
  Rng rng(mix_seed(seed, 0x5b117ULL));
  // partial Fisher-Yates: the first c_seen entries become the seen set
  for (int i = 0; i < c_seen; ++i) {
    const std::uint32_t j =
        static_cast<std::uint32_t>(i) + rng.below(static_cast<std::uint32_t>(c - i));
    std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
  }
  SplitSpec s;
  s.c_seen = c_seen;
  s.seed = seed;
  s.seen.assign(ids.begin(), ids.begin() + c_seen);
  s.unseen.assign(ids.begin() + c_seen, ids.end());
  std::sort(s.seen.begin(), s.seen.end());
  std::sort(s.unseen.begin(), s.unseen.end());
  return s;
}

}  // namespace siamzero
