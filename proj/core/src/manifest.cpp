#include "siamzero/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace siamzero {

int Manifest::num_classes() const {
  int mx = -1;
  for (const auto& e : entries) mx = std::max(mx, e.class_id);
  return mx + 1;
}

Manifest load_manifest(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) fail(path + ": cannot open manifest");

  Manifest m;
  std::set<std::string> seen_paths;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      fail(path + ":" + std::to_string(lineno) +
           ": expected 'path<TAB>classid'");
    std::string p = line.substr(0, tab);
    std::string id_str = line.substr(tab + 1);
    if (id_str.empty()) fail(path + ":" + std::to_string(lineno) + ": empty class id");
    for (char c : id_str)
      if (c < '0' || c > '9')
        fail(path + ":" + std::to_string(lineno) + ": class id is not a" +
             " non-negative integer ('" + id_str + "')");
    int id = 0;
    try {
      id = std::stoi(id_str);
    } catch (const std::exception&) {
      fail(path + ":" + std::to_string(lineno) + ": class id out of range");
    }
    if (!seen_paths.insert(p).second)
      fail(path + ":" + std::to_string(lineno) + ": duplicate path '" + p + "'");
    m.entries.push_back({std::move(p), id});
  }
  if (m.entries.empty()) fail(path + ": empty manifest");

  if (strict) {
    const int c = m.num_classes();
    std::vector<bool> present(static_cast<std::size_t>(c), false);
    for (const auto& e : m.entries) present[static_cast<std::size_t>(e.class_id)] = true;
    for (int i = 0; i < c; ++i)
      if (!present[static_cast<std::size_t>(i)])
        fail(path + ": class id range has a gap at " + std::to_string(i) +
             " (strict mode requires ids to cover [0, " + std::to_string(c) + "))");
  }
  return m;
}

void save_manifest(const Manifest& m, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(path + ": cannot open for writing");
  for (const auto& e : m.entries) out << e.path << '\t' << e.class_id << '\n';
  out.flush();
  if (!out) fail(path + ": write failed");
}

}  // namespace siamzero
