#pragma once

#include <string>
#include <vector>

#include "siamzero/common.hpp"

namespace siamzero {

inline constexpr int kEmbedDim = 128;

struct ConvBlock {
  int out_channels = 0;
  int kernel = 3;
  bool pool_after = false;
};

/// Backbone layout: seven conv blocks (each conv -> batchnorm -> relu, with
/// an optional 2x2 max pool), then one dense layer to the 128-dim embedding.
///
/// Text grammar, comma separated:
///   arch  = item { "," item }
///   item  = conv | "pool"
///   conv  = channels "x" kernel      (e.g. "32x3")
/// "pool" attaches to the preceding conv block.
struct ArchitectureSpec {
  std::vector<ConvBlock> convs;
  bool relu_on_embedding = false;

  static ArchitectureSpec default_spec();
  static ArchitectureSpec parse(const std::string& text);
  std::string to_string() const;

  /// Throws unless: exactly 7 conv blocks, odd square kernels, and the
  /// pooling schedule keeps the 64x64 input at a positive even size.
  void validate() const;

  int pool_count() const;
  /// Spatial side after all pools, starting from 64.
  int final_spatial() const;
  /// Flattened dense input size.
  int flat_dim() const;
};

}  // namespace siamzero
