#include "siamzero/toygen.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>

#include "siamzero/manifest.hpp"
#include "siamzero/pgm.hpp"

namespace siamzero {

namespace {

constexpr int kCanvas = 64;

void stamp(GrayImage& img, int x, int y, int thickness, int intensity) {
  const int lo = -(thickness / 2);
  const int hi = lo + thickness;
  for (int dy = lo; dy < hi; ++dy) {
    for (int dx = lo; dx < hi; ++dx) {
      const int px = x + dx, py = y + dy;
      if (px < 0 || px >= kCanvas || py < 0 || py >= kCanvas) continue;
      auto& p = img.at(px, py);
      p = static_cast<std::uint8_t>(std::min<int>(p, intensity));
    }
  }
}

void draw_line(GrayImage& img, int x0, int y0, int x1, int y1, int thickness,
               int intensity) {
  // Bresenham
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  int x = x0, y = y0;
  while (true) {
    stamp(img, x, y, thickness, intensity);
    if (x == x1 && y == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

void draw_stroke(GrayImage& img, const StrokeSeg& s) {
  if (!s.bend) {
    draw_line(img, s.x0, s.y0, s.x1, s.y1, s.thickness, s.intensity);
    return;
  }
  // integer quadratic curve: 16 fixed subdivisions, (16-i)^2+2i(16-i)+i^2=256
  int px = s.x0, py = s.y0;
  for (int i = 1; i <= 16; ++i) {
    const int a = (16 - i) * (16 - i);
    const int bb = 2 * i * (16 - i);
    const int c = i * i;
    const int x = (a * s.x0 + bb * s.cx + c * s.x1 + 128) / 256;
    const int y = (a * s.y0 + bb * s.cy + c * s.y1 + 128) / 256;
    draw_line(img, px, py, x, y, s.thickness, s.intensity);
    px = x;
    py = y;
  }
}

int clamp_coord(int v) { return std::clamp(v, 1, kCanvas - 2); }

/// Triangular integer offset in [-amp, amp].
int jitter_offset(Rng& rng, int amp) {
  if (amp <= 0) return 0;
  const auto n = static_cast<std::uint32_t>(amp) + 1;
  return static_cast<int>(rng.below(n)) - static_cast<int>(rng.below(n));
}

GrayImage render_impl(const GlyphClassSpec& spec, Rng* jitter) {
  GrayImage img(kCanvas, kCanvas, 255);
  const int extra_thickness =
      jitter ? jitter_offset(*jitter, spec.thickness_jitter) : 0;
  const int intensity_shift =
      jitter ? static_cast<int>(jitter->below(
                   static_cast<std::uint32_t>(spec.intensity_jitter) + 1))
             : 0;
  for (const auto& stroke : spec.strokes) {
    StrokeSeg s = stroke;
    if (jitter) {
      s.x0 = clamp_coord(s.x0 + jitter_offset(*jitter, spec.jitter_amp));
      s.y0 = clamp_coord(s.y0 + jitter_offset(*jitter, spec.jitter_amp));
      s.x1 = clamp_coord(s.x1 + jitter_offset(*jitter, spec.jitter_amp));
      s.y1 = clamp_coord(s.y1 + jitter_offset(*jitter, spec.jitter_amp));
      s.cx = clamp_coord(s.cx + jitter_offset(*jitter, spec.jitter_amp + 1));
      s.cy = clamp_coord(s.cy + jitter_offset(*jitter, spec.jitter_amp + 1));
      s.thickness = std::clamp(s.thickness + extra_thickness, 1, 4);
      s.intensity = std::clamp(s.intensity + intensity_shift, 0, 120);
    }
    draw_stroke(img, s);
  }
  return img;
}

}  // namespace

GlyphClassSpec gen_class(std::uint64_t seed, int complexity) {
  require(complexity >= 2, "gen_class: complexity must be >= 2 strokes");
  Rng rng(mix_seed(seed, 0x91f7ULL));
  GlyphClassSpec spec;
  spec.seed = seed;
  spec.complexity = complexity;
  for (int i = 0; i < complexity; ++i) {
    StrokeSeg s;
    // endpoints inside a margin box, re-drawn until the stroke is long
    // enough to matter (bounded, deterministic)
    for (int attempt = 0; attempt < 16; ++attempt) {
      s.x0 = 10 + static_cast<int>(rng.below(44));
      s.y0 = 10 + static_cast<int>(rng.below(44));
      s.x1 = 10 + static_cast<int>(rng.below(44));
      s.y1 = 10 + static_cast<int>(rng.below(44));
      const int len2 = (s.x1 - s.x0) * (s.x1 - s.x0) + (s.y1 - s.y0) * (s.y1 - s.y0);
      if (len2 >= 144) break;
    }
    s.bend = rng.below(8) < 3;
    if (s.bend) {
      s.cx = clamp_coord((s.x0 + s.x1) / 2 + static_cast<int>(rng.below(21)) - 10);
      s.cy = clamp_coord((s.y0 + s.y1) / 2 + static_cast<int>(rng.below(21)) - 10);
    }
    s.thickness = 2;
    s.intensity = 32;
    spec.strokes.push_back(s);
  }
  return spec;
}

std::vector<GlyphClassSpec> gen_charset(int classes, std::uint64_t seed,
                                        int complexity, double min_distance,
                                        int max_retries) {
  require(classes >= 1, "gen_charset: need at least one class");
  std::vector<GlyphClassSpec> specs;
  std::vector<GrayImage> templates;
  for (int c = 0; c < classes; ++c) {
    bool accepted = false;
    for (int attempt = 0; attempt < max_retries && !accepted; ++attempt) {
      GlyphClassSpec spec = gen_class(
          mix_seed(seed, (static_cast<std::uint64_t>(c) << 16) | static_cast<std::uint64_t>(attempt)),
          complexity);
      spec.class_id = c;
      GrayImage tpl = render_template(spec);
      accepted = true;
      for (const auto& other : templates) {
        if (image_distance(tpl, other) < min_distance) {
          accepted = false;
          break;
        }
      }
      if (accepted) {
        specs.push_back(std::move(spec));
        templates.push_back(std::move(tpl));
      }
    }
    if (!accepted)
      fail("gen_charset: could not satisfy the template distinctness floor " +
           std::to_string(min_distance) + " for class " + std::to_string(c) +
           " after " + std::to_string(max_retries) + " retries");
  }
  return specs;
}

GrayImage render_template(const GlyphClassSpec& spec) {
  return render_impl(spec, nullptr);
}

GrayImage render_sample(const GlyphClassSpec& spec, std::uint64_t jitter_seed) {
  Rng rng(mix_seed(spec.seed, mix_seed(jitter_seed, 0x7a3dULL)));
  return render_impl(spec, &rng);
}

double image_distance(const GrayImage& a, const GrayImage& b) {
  require(a.width == b.width && a.height == b.height,
          "image_distance: size mismatch");
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i)
    sum += std::abs(static_cast<int>(a.pixels[i]) - static_cast<int>(b.pixels[i]));
  return static_cast<double>(sum) / (255.0 * static_cast<double>(a.pixels.size()));
}

void write_toy_dataset(const std::string& dir, int classes, int samples_per_class,
                       std::uint64_t seed, int complexity) {
  require(samples_per_class >= 1, "write_toy_dataset: need samples");
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "images");
  fs::create_directories(fs::path(dir) / "templates");

  const auto specs = gen_charset(classes, seed, complexity);
  Manifest samples_m, templates_m;
  for (const auto& spec : specs) {
    const std::string tpl_rel =
        "templates/class_" + std::to_string(spec.class_id) + ".pgm";
    save_pgm(render_template(spec), (fs::path(dir) / tpl_rel).string());
    templates_m.entries.push_back({tpl_rel, spec.class_id});
    for (int i = 0; i < samples_per_class; ++i) {
      const std::string rel = "images/c" + std::to_string(spec.class_id) + "_s" +
                              std::to_string(i) + ".pgm";
      save_pgm(render_sample(spec, static_cast<std::uint64_t>(i)),
               (fs::path(dir) / rel).string());
      samples_m.entries.push_back({rel, spec.class_id});
    }
  }
  save_manifest(samples_m, (fs::path(dir) / "manifest.tsv").string());
  save_manifest(templates_m, (fs::path(dir) / "templates.tsv").string());
}

}  // namespace siamzero
