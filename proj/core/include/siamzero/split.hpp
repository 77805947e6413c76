#pragma once

#include <cstdint>
#include <vector>

#include "siamzero/common.hpp"

namespace siamzero {

/// Deterministic partition of the character set into seen and unseen
/// classes; both id lists are kept sorted.
struct SplitSpec {
  int c_seen = 0;
  std::uint64_t seed = 0;
  std::vector<int> seen;
  std::vector<int> unseen;
};

/// Uniform seeded draw of c_seen classes; requires 0 < c_seen <= |charset|.
/// (c_seen == |charset| is the closed-set case with an empty unseen side.)
SplitSpec split_charset(const std::vector<int>& charset, int c_seen,
                        std::uint64_t seed);

}  // namespace siamzero
