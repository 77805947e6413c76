#include "siamzero/prep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace siamzero {

GrayImage invert(const GrayImage& img) {
  GrayImage out = img;
  for (auto& p : out.pixels) p = static_cast<std::uint8_t>(255 - p);
  return out;
}

GrayImage crop_foreground(const GrayImage& img, int threshold) {
  int min_x = img.width, max_x = -1, min_y = img.height, max_y = -1;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (img.at(x, y) > threshold) {
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
      }
    }
  }
  if (max_x < 0) fail("crop_foreground: empty foreground");
  GrayImage out(max_x - min_x + 1, max_y - min_y + 1);
  for (int y = min_y; y <= max_y; ++y)
    for (int x = min_x; x <= max_x; ++x)
      out.at(x - min_x, y - min_y) = img.at(x, y);
  return out;
}

double aspect_map(double r) {
  if (!(r > 0.0) || r > 1.0) fail("aspect_map: ratio must be in (0, 1]");
  return std::sqrt(std::sin(1.5707963267948966 * r));
}

namespace {

// Bilinear sample with the half-pixel-center convention, clamped at borders.
float sample_bilinear(const GrayImage& src, double sx, double sy) {
  const double fx = std::floor(sx - 0.5);
  const double fy = std::floor(sy - 0.5);
  const double wx = sx - 0.5 - fx;
  const double wy = sy - 0.5 - fy;
  const auto clamp_x = [&](int v) { return std::clamp(v, 0, src.width - 1); };
  const auto clamp_y = [&](int v) { return std::clamp(v, 0, src.height - 1); };
  const int x0 = clamp_x(static_cast<int>(fx)), x1 = clamp_x(static_cast<int>(fx) + 1);
  const int y0 = clamp_y(static_cast<int>(fy)), y1 = clamp_y(static_cast<int>(fy) + 1);
  const double v00 = src.at(x0, y0), v10 = src.at(x1, y0);
  const double v01 = src.at(x0, y1), v11 = src.at(x1, y1);
  const double top = v00 + (v10 - v00) * wx;
  const double bot = v01 + (v11 - v01) * wx;
  return static_cast<float>(top + (bot - top) * wy);
}

}  // namespace

NormalizedImage normalize(const GrayImage& img) {
  const int w = img.width, h = img.height;
  NormalizedImage out;

  int gw, gh;
  if (w == 1 && h == 1) {
    // Degenerate crop: nothing to scale, place the single pixel at center.
    gw = gh = 1;
  } else if (w >= h) {
    gw = kNormSize;
    gh = static_cast<int>(
        std::lround(kNormSize * aspect_map(static_cast<double>(h) / w)));
  } else {
    gh = kNormSize;
    gw = static_cast<int>(
        std::lround(kNormSize * aspect_map(static_cast<double>(w) / h)));
  }
  gw = std::max(gw, 1);
  gh = std::max(gh, 1);

  const int off_x = (kNormSize - gw) / 2;  // odd margins round toward top-left
  const int off_y = (kNormSize - gh) / 2;

  const double scale_x = static_cast<double>(w) / gw;
  const double scale_y = static_cast<double>(h) / gh;
  for (int oy = 0; oy < gh; ++oy) {
    const double sy = (oy + 0.5) * scale_y;
    for (int ox = 0; ox < gw; ++ox) {
      const double sx = (ox + 0.5) * scale_x;
      out.at(off_x + ox, off_y + oy) =
          sample_bilinear(img, sx, sy) * (1.0f / 255.0f);
    }
  }
  return out;
}

NormalizedImage preprocess(const GrayImage& img, int threshold) {
  return normalize(crop_foreground(invert(img), threshold));
}

void write_normalized(const NormalizedImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path + ": cannot open for writing");
  out.write("SZIM", 4);
  write_u32(out, kNormSize);
  write_u32(out, kNormSize);
  write_f32_array(out, img.pixels.data(), img.pixels.size());
  out.flush();
  if (!out) fail(path + ": write failed");
}

NormalizedImage read_normalized(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path + ": cannot open file");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "SZIM") fail(path + ": bad SZIM magic");
  const std::uint32_t w = read_u32(in, "SZIM header");
  const std::uint32_t h = read_u32(in, "SZIM header");
  if (w != kNormSize || h != kNormSize)
    fail(path + ": unexpected SZIM dimensions " + std::to_string(w) + "x" +
         std::to_string(h));
  NormalizedImage img;
  read_f32_array(in, img.pixels.data(), img.pixels.size(), "SZIM payload");
  return img;
}

}  // namespace siamzero
