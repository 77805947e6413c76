#include "siamzero/arch.hpp"

#include <sstream>

#include "siamzero/prep.hpp"

namespace siamzero {

ArchitectureSpec ArchitectureSpec::default_spec() {
  return parse("32x3,pool,32x3,pool,64x3,pool,64x3,128x3,pool,128x3,128x3");
}

ArchitectureSpec ArchitectureSpec::parse(const std::string& text) {
  ArchitectureSpec spec;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) fail("arch: empty item in '" + text + "'");
    if (item == "pool") {
      if (spec.convs.empty())
        fail("arch: 'pool' must follow a conv block in '" + text + "'");
      if (spec.convs.back().pool_after)
        fail("arch: repeated 'pool' after one conv block in '" + text + "'");
      spec.convs.back().pool_after = true;
      continue;
    }
    const auto x = item.find('x');
    if (x == std::string::npos || x == 0 || x + 1 >= item.size())
      fail("arch: expected '<channels>x<kernel>' or 'pool', got '" + item + "'");
    int channels = 0, kernel = 0;
    try {
      channels = std::stoi(item.substr(0, x));
      kernel = std::stoi(item.substr(x + 1));
    } catch (const std::exception&) {
      fail("arch: bad conv item '" + item + "'");
    }
    spec.convs.push_back({channels, kernel, false});
  }
  return spec;
}

std::string ArchitectureSpec::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    if (i) os << ',';
    os << convs[i].out_channels << 'x' << convs[i].kernel;
    if (convs[i].pool_after) os << ",pool";
  }
  return os.str();
}

void ArchitectureSpec::validate() const {
  if (convs.size() != 7)
    fail("arch: expected exactly 7 conv blocks, got " +
         std::to_string(convs.size()));
  int spatial = kNormSize;
  for (const auto& c : convs) {
    if (c.out_channels < 1) fail("arch: conv channels must be >= 1");
    if (c.kernel < 1 || c.kernel % 2 == 0)
      fail("arch: kernel must be odd and >= 1, got " + std::to_string(c.kernel));
    if (c.pool_after) {
      if (spatial < 2 || spatial % 2 != 0)
        fail("arch: pooling schedule reaches a non-poolable spatial size " +
             std::to_string(spatial));
      spatial /= 2;
    }
  }
  if (spatial < 1) fail("arch: spatial size collapsed to zero");
}

int ArchitectureSpec::pool_count() const {
  int p = 0;
  for (const auto& c : convs) p += c.pool_after ? 1 : 0;
  return p;
}

int ArchitectureSpec::final_spatial() const {
  int spatial = kNormSize;
  for (int i = 0; i < pool_count(); ++i) spatial /= 2;
  return spatial;
}

int ArchitectureSpec::flat_dim() const {
  const int s = final_spatial();
  return convs.back().out_channels * s * s;
}

}  // namespace siamzero
