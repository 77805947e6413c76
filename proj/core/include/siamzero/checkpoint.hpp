#pragma once

#include <string>

#include "siamzero/sgd.hpp"

namespace siamzero {

// "SZCK" container: magic, u32 version, u32 tensor count, then per tensor
// (u32 name length, name bytes, u32 rank, u32 dims..., float32 LE payload).
// Includes batch-norm running statistics and the similarity head.

void save_checkpoint(const ParamMap& params, const std::string& path);
ParamMap load_checkpoint(const std::string& path);

}  // namespace siamzero
