#include "siamzero/tensor.hpp"

#include <sstream>

namespace siamzero {

Tensor Tensor::uniform(std::vector<int> s, Rng& rng, float lo, float hi) {
  Tensor t(std::move(s));
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

std::string shape_to_string(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

}  // namespace siamzero
