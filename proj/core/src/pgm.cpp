#include "siamzero/pgm.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace siamzero {

namespace {

// Reads the next header token, skipping whitespace and '#' comment lines.
bool next_token(std::istream& in, std::string& tok) {
  tok.clear();
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    } else {
      c = in.get();
    }
  }
  if (c == EOF) return false;
  while (c != EOF && !std::isspace(c) && c != '#') {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  if (c == '#') in.unget();
  return true;
}

long parse_dim(const std::string& tok, const std::string& path) {
  for (char c : tok)
    if (c < '0' || c > '9')
      fail(path + ": malformed header (expected integer, got '" + tok + "')");
  try {
    return std::stol(tok);
  } catch (const std::exception&) {
    fail(path + ": malformed header (value out of range '" + tok + "')");
  }
}

}  // namespace

GrayImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path + ": cannot open file");

  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P') fail(path + ": malformed header (no magic)");
  if (magic[1] != '5')
    fail(path + ": unsupported format (magic P" + std::string(1, magic[1]) +
         ", only binary P5 is supported)");

  std::string tok;
  if (!next_token(in, tok)) fail(path + ": malformed header (missing width)");
  long w = parse_dim(tok, path);
  if (!next_token(in, tok)) fail(path + ": malformed header (missing height)");
  long h = parse_dim(tok, path);
  if (!next_token(in, tok)) fail(path + ": malformed header (missing maxval)");
  long maxval = parse_dim(tok, path);

  if (w < 1 || h < 1) fail(path + ": malformed header (bad dimensions)");
  if (maxval != 255)
    fail(path + ": maxval must be 255 (got " + std::to_string(maxval) + ")");

  // The single whitespace byte after maxval was already consumed by
  // next_token; payload starts here.
  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (!in || static_cast<std::size_t>(in.gcount()) != img.pixels.size())
    fail(path + ": truncated payload");
  return img;
}

void save_pgm(const GrayImage& img, const std::string& path) {
  require(img.width >= 1 && img.height >= 1 &&
              img.pixels.size() == static_cast<std::size_t>(img.width) * img.height,
          "save_pgm: invalid image");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path + ": cannot open for writing");
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  out.flush();
  if (!out) fail(path + ": write failed");
}

}  // namespace siamzero
