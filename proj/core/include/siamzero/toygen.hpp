#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "siamzero/image.hpp"

namespace siamzero {

/// One stroke on the 64x64 canvas: a straight segment or, when bend is set,
/// an integer quadratic curve through the control point (cx, cy). All
/// rasterization is integer arithmetic, so renders are bit-identical across
/// platforms.
struct StrokeSeg {
  int x0 = 0, y0 = 0;
  int cx = 0, cy = 0;
  int x1 = 0, y1 = 0;
  bool bend = false;
  int thickness = 2;
  int intensity = 32;  // dark stroke value on the white background
};

/// Seeded stroke program for one glyph class plus its jitter parameters.
struct GlyphClassSpec {
  int class_id = 0;
  std::uint64_t seed = 0;
  int complexity = 0;       // stroke count, >= 2
  int jitter_amp = 2;       // max endpoint offset in pixels per sample
  int thickness_jitter = 1;
  int intensity_jitter = 64;  // max per-sample stroke brightening
  std::vector<StrokeSeg> strokes;
};

/// Deterministic stroke program; rejects complexity < 2.
GlyphClassSpec gen_class(std::uint64_t seed, int complexity);

/// Generates `classes` programs with a minimum pairwise template distance
/// (mean absolute pixel difference in [0,1]); collides are regenerated from
/// derived seeds, erroring after bounded retries.
std::vector<GlyphClassSpec> gen_charset(int classes, std::uint64_t seed,
                                        int complexity,
                                        double min_distance = 0.02,
                                        int max_retries = 64);

/// Template rendering: zero jitter, white background, dark strokes.
GrayImage render_template(const GlyphClassSpec& spec);

/// Jittered handwritten-sample analog: endpoint noise, thickness and
/// intensity variation, all integer-valued.
GrayImage render_sample(const GlyphClassSpec& spec, std::uint64_t jitter_seed);

/// Mean absolute pixel difference scaled to [0, 1].
double image_distance(const GrayImage& a, const GrayImage& b);

/// Writes samples_per_class jittered PGMs per class plus one template each,
/// with manifest.tsv and templates.tsv, under dir. Bit-identical on rerun.
void write_toy_dataset(const std::string& dir, int classes, int samples_per_class,
                       std::uint64_t seed, int complexity = 4);

}  // namespace siamzero
