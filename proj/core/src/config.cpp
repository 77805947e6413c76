#include "siamzero/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace siamzero {

namespace {

enum class Kind { kInt, kDouble, kString };

struct KeySpec {
  const char* name;
  Kind kind;
  const char* default_value;
};

// The whole configuration surface; anything else is rejected.
const KeySpec kKeys[] = {
    {"seed", Kind::kInt, "0"},
    {"batch_size", Kind::kInt, "256"},
    {"lr0", Kind::kDouble, "0.1"},
    {"lr_decay", Kind::kDouble, "0.1"},
    {"plateau_patience", Kind::kInt, "3"},
    {"momentum", Kind::kDouble, "0.9"},
    {"weight_decay", Kind::kDouble, "1e-4"},
    {"max_epochs", Kind::kInt, "100"},
    {"n", Kind::kInt, "5"},
    {"c_seen", Kind::kInt, "0"},  // 0 = all classes seen (closed set)
    {"train_frac", Kind::kDouble, "0.75"},
    {"conv", Kind::kString, "32x3,pool,32x3,pool,64x3,pool,64x3,128x3,pool,128x3,128x3"},
    {"embed_activation", Kind::kString, "none"},
    {"threshold", Kind::kInt, "0"},
};

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : kKeys)
    if (key == k.name) return &k;
  return nullptr;
}

}  // namespace

Config Config::defaults() {
  Config c;
  for (const auto& k : kKeys) c.values_[k.name] = k.default_value;
  if (const char* env = std::getenv("SIAMZERO_SEED"); env && *env)
    c.set("seed", env);
  return c;
}

Config Config::load(const std::string& path) {
  Config c = defaults();
  std::ifstream in(path);
  if (!in) fail(path + ": cannot open config file");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      fail(path + ":" + std::to_string(lineno) + ": expected key=value");
    try {
      c.set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      fail(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

void Config::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_key(key);
  if (!spec) fail("config: unknown key '" + key + "'");
  switch (spec->kind) {
    case Kind::kInt: {
      std::size_t pos = 0;
      try {
        (void)std::stoll(value, &pos);
      } catch (const std::exception&) {
        pos = std::string::npos;
      }
      if (pos != value.size() || value.empty())
        fail("config: key '" + key + "' expects an integer, got '" + value + "'");
      break;
    }
    case Kind::kDouble: {
      std::size_t pos = 0;
      try {
        (void)std::stod(value, &pos);
      } catch (const std::exception&) {
        pos = std::string::npos;
      }
      if (pos != value.size() || value.empty())
        fail("config: key '" + key + "' expects a number, got '" + value + "'");
      break;
    }
    case Kind::kString:
      break;
  }
  values_[key] = value;
}

std::int64_t Config::get_int(const std::string& key) const {
  return std::stoll(values_.at(key));
}

double Config::get_double(const std::string& key) const {
  return std::stod(values_.at(key));
}

const std::string& Config::get_string(const std::string& key) const {
  return values_.at(key);
}

TrainConfig Config::train_config() const {
  TrainConfig t;
  t.batch_size = static_cast<int>(get_int("batch_size"));
  t.lr0 = static_cast<float>(get_double("lr0"));
  t.lr_decay = static_cast<float>(get_double("lr_decay"));
  t.plateau_patience = static_cast<int>(get_int("plateau_patience"));
  t.momentum = static_cast<float>(get_double("momentum"));
  t.weight_decay = static_cast<float>(get_double("weight_decay"));
  t.max_epochs = static_cast<int>(get_int("max_epochs"));
  t.seed = static_cast<std::uint64_t>(get_int("seed"));
  t.negatives_per_cell = static_cast<int>(get_int("n"));
  t.train_frac = static_cast<float>(get_double("train_frac"));
  t.validate();
  return t;
}

ArchitectureSpec Config::arch() const {
  ArchitectureSpec spec = ArchitectureSpec::parse(get_string("conv"));
  const std::string& act = get_string("embed_activation");
  if (act == "relu")
    spec.relu_on_embedding = true;
  else if (act != "none")
    fail("config: embed_activation must be 'none' or 'relu', got '" + act + "'");
  spec.validate();
  return spec;
}

std::string Config::resolved_text() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << '=' << v << '\n';
  return os.str();
}

}  // namespace siamzero
