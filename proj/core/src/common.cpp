#include "siamzero/common.hpp"

#include <bit>
#include <cstring>
#include <numeric>

namespace siamzero {

std::vector<int> Rng::sample_without_replacement(int m, int k) {
  require(k >= 0 && k <= m, "sample_without_replacement: k out of range");
  std::vector<int> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    std::uint32_t j = i + below(static_cast<std::uint32_t>(m - i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    out.push_back(idx[static_cast<std::size_t>(i)]);
  }
  return out;
}

void write_f32_array(std::ostream& out, const float* data, std::size_t count) {
  std::vector<unsigned char> buf(count * 4);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t v = std::bit_cast<std::uint32_t>(data[i]);
    buf[i * 4 + 0] = static_cast<unsigned char>(v & 0xff);
    buf[i * 4 + 1] = static_cast<unsigned char>((v >> 8) & 0xff);
    buf[i * 4 + 2] = static_cast<unsigned char>((v >> 16) & 0xff);
    buf[i * 4 + 3] = static_cast<unsigned char>((v >> 24) & 0xff);
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
}

void read_f32_array(std::istream& in, float* data, std::size_t count,
                    const std::string& what) {
  std::vector<unsigned char> buf(count * 4);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  if (!in || static_cast<std::size_t>(in.gcount()) != buf.size())
    fail("truncated " + what);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t v = static_cast<std::uint32_t>(buf[i * 4 + 0]) |
                            (static_cast<std::uint32_t>(buf[i * 4 + 1]) << 8) |
                            (static_cast<std::uint32_t>(buf[i * 4 + 2]) << 16) |
                            (static_cast<std::uint32_t>(buf[i * 4 + 3]) << 24);
    data[i] = std::bit_cast<float>(v);
  }
}

}  // namespace siamzero
