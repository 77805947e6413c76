#include "siamzero/template_matrix.hpp"

#include <fstream>
#include <set>

namespace siamzero {

namespace {
constexpr std::uint32_t kFeatureMatrixVersion = 1;
}

void write_feature_matrix(const TemplateMatrix& m, const std::string& path) {
  require(m.rows() > 0, "write_feature_matrix: empty matrix");
  require(m.values.size() ==
              static_cast<std::size_t>(m.rows()) * kEmbedDim,
          "write_feature_matrix: payload size mismatch");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path + ": cannot open for writing");
  out.write("SZFM", 4);
  write_u32(out, kFeatureMatrixVersion);
  write_u32(out, static_cast<std::uint32_t>(m.rows()));
  write_u32(out, kEmbedDim);
  write_f32_array(out, m.values.data(), m.values.size());
  for (int id : m.class_ids) write_u32(out, static_cast<std::uint32_t>(id));
  out.flush();
  if (!out) fail(path + ": write failed");
}

TemplateMatrix read_feature_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path + ": cannot open file");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "SZFM") fail(path + ": bad SZFM magic");
  const std::uint32_t version = read_u32(in, "SZFM header");
  if (version != kFeatureMatrixVersion)
    fail(path + ": unsupported SZFM version " + std::to_string(version));
  const std::uint32_t rows = read_u32(in, "SZFM header");
  const std::uint32_t cols = read_u32(in, "SZFM header");
  if (cols != kEmbedDim)
    fail(path + ": SZFM column count " + std::to_string(cols) +
         " does not match the embedding dimension " + std::to_string(kEmbedDim));
  if (rows == 0) fail(path + ": SZFM with zero rows");

  TemplateMatrix m;
  m.values.resize(static_cast<std::size_t>(rows) * cols);
  read_f32_array(in, m.values.data(), m.values.size(), "SZFM payload");
  std::set<int> seen;
  for (std::uint32_t r = 0; r < rows; ++r) {
    const int id = static_cast<int>(read_u32(in, "SZFM class-id table"));
    if (!seen.insert(id).second)
      fail(path + ": duplicate class id " + std::to_string(id));
    m.class_ids.push_back(id);
  }
  return m;
}

}  // namespace siamzero
