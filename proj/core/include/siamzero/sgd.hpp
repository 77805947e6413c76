#pragma once

#include <map>
#include <string>
#include <vector>

#include "siamzero/tensor.hpp"

namespace siamzero {

/// Named parameter container; ordered map keeps update and checkpoint
/// iteration deterministic.
using ParamMap = std::map<std::string, Tensor>;

/// SGD with momentum and L2 weight decay:
///   v <- mu * v - lr * (g + lambda * theta);  theta <- theta + v
struct SgdState {
  float learning_rate = 0.1f;
  float momentum = 0.9f;
  float weight_decay = 1e-4f;
  std::map<std::string, std::vector<float>> velocity;
};

/// Updates one tensor in place from its .grad buffer.
void sgd_update(Tensor& param, std::vector<float>& velocity, const SgdState& state);

/// Updates every named learnable parameter; velocities are created lazily.
void sgd_step(ParamMap& params, const std::vector<std::string>& learnable,
              SgdState& state);

}  // namespace siamzero
