#pragma once

#include <string>
#include <vector>

#include "siamzero/image.hpp"

namespace siamzero {

inline constexpr int kNormSize = 64;

/// 64x64 float raster in [0,1], background exactly 0.
struct NormalizedImage {
  std::vector<float> pixels;  // kNormSize * kNormSize

  NormalizedImage() : pixels(kNormSize * kNormSize, 0.0f) {}

  float at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * kNormSize + x];
  }
  float& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * kNormSize + x];
  }
};

/// Gray-level reversal I' = 255 - I; involution.
GrayImage invert(const GrayImage& img);

/// Tightest bounding box of pixels strictly above threshold.
/// Throws "empty foreground" when nothing qualifies.
GrayImage crop_foreground(const GrayImage& img, int threshold = 0);

/// Short-side ratio transform sqrt(sin(pi*r/2)); domain (0,1], fixes 1,
/// strictly increasing.
double aspect_map(double r);

/// Scales a cropped, inverted glyph so the long side becomes 64 and the
/// short side round(64 * aspect_map(r)), samples bilinearly, centers the box
/// on the canvas (odd margins round toward the top-left corner) and maps
/// intensities to [0,1].
NormalizedImage normalize(const GrayImage& img);

/// invert -> crop_foreground -> normalize.
NormalizedImage preprocess(const GrayImage& img, int threshold = 0);

// "SZIM" container: magic, u32 width, u32 height, float32 LE payload.
void write_normalized(const NormalizedImage& img, const std::string& path);
NormalizedImage read_normalized(const std::string& path);

}  // namespace siamzero
