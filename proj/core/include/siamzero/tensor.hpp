#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "siamzero/common.hpp"

namespace siamzero {

/// n-dimensional float32 array, row-major, with an optional gradient buffer
/// of the same shape.
struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;
  std::vector<float> grad;  // empty until ensure_grad()

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(static_cast<std::size_t>(numel()), 0.0f);
  }

  std::int64_t numel() const {
    std::int64_t n = 1;
    for (int d : shape) {
      require(d >= 0, "Tensor: negative dimension");
      n *= d;
    }
    return n;
  }

  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0f);
  }
  void zero_grad() {
    if (!grad.empty()) grad.assign(grad.size(), 0.0f);
  }

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<int> s, float v) {
    Tensor t(std::move(s));
    t.data.assign(t.data.size(), v);
    return t;
  }
  /// Uniform values in [lo, hi) from the given rng.
  static Tensor uniform(std::vector<int> s, Rng& rng, float lo, float hi);
};

std::string shape_to_string(const std::vector<int>& shape);

}  // namespace siamzero
