#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "siamzero/arch.hpp"
#include "siamzero/train.hpp"

namespace siamzero {

/// Flat key=value configuration. Unknown keys are rejected; command-line
/// flags override file values; SIAMZERO_SEED supplies the seed when nothing
/// else does. Defaults follow the training recipe: lr0=0.1, batch_size=256,
/// momentum=0.9, weight_decay=1e-4.
class Config {
 public:
  /// Built-in defaults (plus the SIAMZERO_SEED fallback when set).
  static Config defaults();

  /// defaults + key=value file ('#' comments and blank lines allowed).
  static Config load(const std::string& path);

  /// Validates the key against the registry and the value against its type.
  void set(const std::string& key, const std::string& value);

  std::int64_t get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;

  /// Fully validated training section of the config.
  TrainConfig train_config() const;
  /// Parsed and validated "conv" architecture plus embed_activation.
  ArchitectureSpec arch() const;

  /// "key=value" lines, sorted; printed as every run's reproducibility header.
  std::string resolved_text() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace siamzero
