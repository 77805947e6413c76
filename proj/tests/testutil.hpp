#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "siamzero/model.hpp"
#include "siamzero/ops.hpp"

namespace testutil {

using namespace siamzero;

/// Scratch directory under the system temp root, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("siamzero_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline GrayImage random_image(Rng& rng, int w, int h) {
  GrayImage img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

/// Independent six-nested-loop convolution (same padding, stride 1) with the
/// same accumulation convention as the production kernel: float64
/// accumulator seeded with the bias, taps in (ci, ky, kx) order.
inline Tensor naive_conv2d(const Tensor& x, const Tensor& w, const Tensor& b) {
  const int n = x.dim(0), ci = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const int co = w.dim(0), k = w.dim(2), pad = k / 2;
  Tensor y({n, co, h, wd});
  for (int img = 0; img < n; ++img)
    for (int o = 0; o < co; ++o)
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < wd; ++j) {
          double acc = b.data[(std::size_t)o];
          for (int c = 0; c < ci; ++c)
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const int sy = i + ky - pad, sx = j + kx - pad;
                if (sy < 0 || sy >= h || sx < 0 || sx >= wd) continue;
                acc += static_cast<double>(
                           x.data[((std::size_t)(img * ci + c) * h + sy) * wd + sx]) *
                       static_cast<double>(
                           w.data[((std::size_t)(o * ci + c) * k + ky) * k + kx]);
              }
          y.data[((std::size_t)(img * co + o) * h + i) * wd + j] =
              static_cast<float>(acc);
        }
  return y;
}

/// Float64 re-implementation of the whole pair-loss forward (conv blocks,
/// batch norm with batch statistics, relu, first-max pooling, dense,
/// similarity head, logit-form BCE). Independent of the production kernels;
/// used to finite-difference the full chain without float32 noise.
struct RefNet {
  ArchitectureSpec spec;
  std::map<std::string, std::vector<double>> params;

  static RefNet from_model(const SiameseModel& model) {
    RefNet ref;
    ref.spec = model.spec();
    for (const auto& [name, t] : model.params())
      ref.params[name] = std::vector<double>(t.data.begin(), t.data.end());
    return ref;
  }

  std::vector<double> conv(const std::vector<double>& x, int n, int ci, int h,
                           int w, const std::vector<double>& wt,
                           const std::vector<double>& b, int co, int k) const {
    std::vector<double> y((std::size_t)n * co * h * w, 0.0);
    const int pad = k / 2;
    for (int img = 0; img < n; ++img)
      for (int o = 0; o < co; ++o)
        for (int i = 0; i < h; ++i)
          for (int j = 0; j < w; ++j) {
            double acc = b[(std::size_t)o];
            for (int c = 0; c < ci; ++c)
              for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                  const int sy = i + ky - pad, sx = j + kx - pad;
                  if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
                  acc += x[((std::size_t)(img * ci + c) * h + sy) * w + sx] *
                         wt[((std::size_t)(o * ci + c) * k + ky) * k + kx];
                }
            y[((std::size_t)(img * co + o) * h + i) * w + j] = acc;
          }
    return y;
  }

  /// Embeds a batch already flattened to doubles; returns (N, 128).
  std::vector<double> embed(std::vector<double> x, int n) const {
    int h = kNormSize, w = kNormSize, ci = 1;
    for (std::size_t li = 0; li < spec.convs.size(); ++li) {
      const auto& cb = spec.convs[li];
      const std::string cn = "conv" + std::to_string(li + 1);
      const std::string bn = "bn" + std::to_string(li + 1);
      x = conv(x, n, ci, h, w, params.at(cn + ".weight"), params.at(cn + ".bias"),
               cb.out_channels, cb.kernel);
      const int co = cb.out_channels;
      for (int c = 0; c < co; ++c) {
        double sum = 0.0, sq = 0.0;
        const long cnt = (long)n * h * w;
        for (int img = 0; img < n; ++img)
          for (int i = 0; i < h * w; ++i) {
            const double v = x[((std::size_t)(img * co + c)) * h * w + i];
            sum += v;
            sq += v * v;
          }
        const double mean = sum / cnt;
        const double var = std::max(0.0, sq / cnt - mean * mean);
        const double invstd = 1.0 / std::sqrt(var + 1e-5);
        const double g = params.at(bn + ".gamma")[(std::size_t)c];
        const double bt = params.at(bn + ".beta")[(std::size_t)c];
        for (int img = 0; img < n; ++img)
          for (int i = 0; i < h * w; ++i) {
            auto& v = x[((std::size_t)(img * co + c)) * h * w + i];
            v = g * (v - mean) * invstd + bt;
          }
      }
      for (auto& v : x) v = v > 0.0 ? v : 0.0;
      if (cb.pool_after) {
        const int oh = h / 2, ow = w / 2;
        std::vector<double> y((std::size_t)n * co * oh * ow);
        for (int nc = 0; nc < n * co; ++nc)
          for (int i = 0; i < oh; ++i)
            for (int j = 0; j < ow; ++j) {
              double best = x[((std::size_t)nc * h + 2 * i) * w + 2 * j];
              best = std::max(best, x[((std::size_t)nc * h + 2 * i) * w + 2 * j + 1]);
              best = std::max(best, x[((std::size_t)nc * h + 2 * i + 1) * w + 2 * j]);
              best = std::max(best, x[((std::size_t)nc * h + 2 * i + 1) * w + 2 * j + 1]);
              y[((std::size_t)nc * oh + i) * ow + j] = best;
            }
        x = std::move(y);
        h = oh;
        w = ow;
      }
      ci = co;
    }
    const int flat = ci * h * w;
    const auto& fw = params.at("fc.weight");
    const auto& fb = params.at("fc.bias");
    std::vector<double> f((std::size_t)n * kEmbedDim);
    for (int img = 0; img < n; ++img)
      for (int o = 0; o < kEmbedDim; ++o) {
        double acc = fb[(std::size_t)o];
        for (int i = 0; i < flat; ++i)
          acc += x[(std::size_t)img * flat + i] * fw[(std::size_t)o * flat + i];
        if (spec.relu_on_embedding && acc < 0.0) acc = 0.0;
        f[(std::size_t)img * kEmbedDim + o] = acc;
      }
    return f;
  }

  double pair_loss(const std::vector<double>& tpl, const std::vector<double>& smp,
                   const std::vector<int>& labels) const {
    const int n = static_cast<int>(labels.size());
    std::vector<double> x((std::size_t)2 * n * kNormSize * kNormSize);
    std::copy(tpl.begin(), tpl.end(), x.begin());
    std::copy(smp.begin(), smp.end(), x.begin() + tpl.size());
    const std::vector<double> f = embed(std::move(x), 2 * n);
    const auto& hw = params.at("head.weight");
    const double hb = params.at("head.bias")[0];
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
      double z = hb;
      for (int k = 0; k < kEmbedDim; ++k)
        z += hw[(std::size_t)k] * std::fabs(f[(std::size_t)i * kEmbedDim + k] -
                                            f[(std::size_t)(n + i) * kEmbedDim + k]);
      const double zy = labels[(std::size_t)i] ? z : 0.0;
      loss += std::max(z, 0.0) - zy + std::log1p(std::exp(-std::fabs(z)));
    }
    return loss / n;
  }
};

inline bool file_bytes_equal(const std::string& a, const std::string& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  using It = std::istreambuf_iterator<char>;
  return std::vector<char>(It(fa), It()) == std::vector<char>(It(fb), It());
}

}  // namespace testutil
