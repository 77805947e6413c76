#include "siamzero/sgd.hpp"

namespace siamzero {

void sgd_update(Tensor& param, std::vector<float>& velocity, const SgdState& state) {
  require(param.grad.size() == param.data.size(),
          "sgd_update: parameter has no gradient buffer");
  if (velocity.size() != param.data.size())
    velocity.assign(param.data.size(), 0.0f);
  const float lr = state.learning_rate;
  const float mu = state.momentum;
  const float wd = state.weight_decay;
  for (std::size_t i = 0; i < param.data.size(); ++i) {
    const float g = param.grad[i] + wd * param.data[i];
    velocity[i] = mu * velocity[i] - lr * g;
    param.data[i] += velocity[i];
  }
}

void sgd_step(ParamMap& params, const std::vector<std::string>& learnable,
              SgdState& state) {
  for (const auto& name : learnable) {
    auto it = params.find(name);
    require(it != params.end(), "sgd_step: unknown parameter '" + name + "'");
    sgd_update(it->second, state.velocity[name], state);
  }
}

}  // namespace siamzero
