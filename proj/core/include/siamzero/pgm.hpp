#pragma once

#include <string>

#include "siamzero/image.hpp"

namespace siamzero {

/// Reads a binary PGM ("P5") file with maxval 255.
/// Distinct errors: non-P5 magic ("unsupported format"), malformed header,
/// maxval != 255 and truncated payload.
GrayImage load_pgm(const std::string& path);

/// Writes a binary PGM file; load_pgm(save_pgm(x)) == x bit-exactly.
void save_pgm(const GrayImage& img, const std::string& path);

}  // namespace siamzero
