#include "siamzero/checkpoint.hpp"

#include <fstream>

namespace siamzero {

namespace {
constexpr std::uint32_t kCheckpointVersion = 1;
}

void save_checkpoint(const ParamMap& params, const std::string& path) {
  require(!params.empty(), "save_checkpoint: empty parameter set");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path + ": cannot open for writing");
  out.write("SZCK", 4);
  write_u32(out, kCheckpointVersion);
  write_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) write_u32(out, static_cast<std::uint32_t>(d));
    write_f32_array(out, t.data.data(), t.data.size());
  }
  out.flush();
  if (!out) fail(path + ": write failed");
}

ParamMap load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path + ": cannot open file");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "SZCK") fail(path + ": bad SZCK magic");
  const std::uint32_t version = read_u32(in, "checkpoint header");
  if (version != kCheckpointVersion)
    fail(path + ": unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t count = read_u32(in, "checkpoint header");

  ParamMap params;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = read_u32(in, "checkpoint record");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) fail(path + ": truncated checkpoint record");
    const std::uint32_t rank = read_u32(in, "checkpoint record");
    std::vector<int> shape;
    for (std::uint32_t d = 0; d < rank; ++d)
      shape.push_back(static_cast<int>(read_u32(in, "checkpoint record")));
    Tensor t(shape);
    read_f32_array(in, t.data.data(), t.data.size(), "checkpoint payload");
    if (!params.emplace(std::move(name), std::move(t)).second)
      fail(path + ": duplicate tensor name in checkpoint");
  }
  return params;
}

}  // namespace siamzero
