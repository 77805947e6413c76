#pragma once

#include <cstdint>
#include <vector>

#include "siamzero/tensor.hpp"

namespace siamzero {

// All operators store float32 and run reductions through float64
// accumulators in a fixed order, so results are reproducible and oracle
// comparisons stay stable.

inline constexpr float kProbClamp = 1e-7f;

// --- convolution (stride 1, same padding, odd kernel) ----------------------

/// x: (N, Ci, H, W); w: (Co, Ci, kh, kw); b: (Co). Output (N, Co, H, W).
Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b);

struct ConvGrads {
  Tensor dx, dw, db;
};
ConvGrads conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& dy);

// --- 2x2 max pooling, stride 2 ---------------------------------------------

struct PoolOut {
  Tensor y;
  std::vector<std::int32_t> argmax;  // flat input index per output element
};
/// Spatial dims must be even. Ties pick the first maximum in row-major
/// window scan order, so the backward routing is deterministic.
PoolOut maxpool2_forward(const Tensor& x);
Tensor maxpool2_backward(const Tensor& dy, const std::vector<std::int32_t>& argmax,
                         const std::vector<int>& input_shape);

// --- batch normalization ----------------------------------------------------

/// Per-channel learnable scale/shift plus running statistics.
struct BatchNormState {
  Tensor gamma, beta, running_mean, running_var;
  float momentum = 0.1f;
  float eps = 1e-5f;

  static BatchNormState init(int channels);
};

struct BnCache {
  Tensor xhat;
  std::vector<float> invstd;  // per channel
  bool train = false;
};

/// Train mode normalizes with batch statistics (biased variance) and updates
/// running stats as running <- (1-m)*running + m*batch; requires batch >= 2.
/// Infer mode normalizes with the running statistics.
Tensor batchnorm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         Tensor& running_mean, Tensor& running_var,
                         float momentum, float eps, bool train,
                         BnCache* cache = nullptr);
inline Tensor batchnorm_forward(const Tensor& x, BatchNormState& state,
                                bool train, BnCache* cache = nullptr) {
  return batchnorm_forward(x, state.gamma, state.beta, state.running_mean,
                           state.running_var, state.momentum, state.eps, train,
                           cache);
}

struct BnGrads {
  Tensor dx, dgamma, dbeta;
};
/// Backward through the train-mode batch statistics.
BnGrads batchnorm_backward(const Tensor& dy, const BnCache& cache,
                           const Tensor& gamma);

// --- dense / elementwise -----------------------------------------------------

/// x: (N, I); w: (O, I); b: (O). Output (N, O).
Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b);
struct DenseGrads {
  Tensor dx, dw, db;
};
DenseGrads dense_backward(const Tensor& x, const Tensor& w, const Tensor& dy);

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& dy, const Tensor& y);

Tensor sigmoid(const Tensor& x);
Tensor sigmoid_backward(const Tensor& dy, const Tensor& y);
float sigmoid_scalar(float z);

Tensor abs_diff(const Tensor& a, const Tensor& b);
struct AbsDiffGrads {
  Tensor da, db;
};
AbsDiffGrads abs_diff_backward(const Tensor& dy, const Tensor& a, const Tensor& b);

// --- losses ------------------------------------------------------------------

/// Negative binary cross entropy -[y log p + (1-y) log(1-p)] with p clamped
/// to [1e-7, 1 - 1e-7].
float bce_loss(float p, int y);
/// dL/dp at the clamped probability.
float bce_backward(float p, int y);
/// Same composite evaluated from the logit, bce(sigmoid(z), y), in the
/// log1p form that stays accurate when sigmoid saturates. d/dz = p - y.
float bce_with_logit(float z, int y);

/// Mean cross entropy over the batch; fills probs (N, C) when given.
float softmax_xent_forward(const Tensor& logits, const std::vector<int>& labels,
                           Tensor* probs);
/// dL/dlogits = (probs - onehot) / N.
Tensor softmax_xent_backward(const Tensor& probs, const std::vector<int>& labels);

}  // namespace siamzero
