#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "siamzero/config.hpp"
#include "testutil.hpp"

using namespace siamzero;
using testutil::TempDir;

TEST_CASE("config: defaults follow the training recipe") {
  unsetenv("SIAMZERO_SEED");
  const Config cfg = Config::defaults();
  CHECK(cfg.get_double("lr0") == 0.1);
  CHECK(cfg.get_int("batch_size") == 256);
  CHECK(cfg.get_double("momentum") == 0.9);
  CHECK(cfg.get_double("weight_decay") == doctest::Approx(1e-4));
  CHECK(cfg.get_int("seed") == 0);

  const TrainConfig tc = cfg.train_config();  // validates
  CHECK(tc.lr0 == 0.1f);
  CHECK(tc.batch_size == 256);

  const ArchitectureSpec arch = cfg.arch();
  CHECK(arch.convs.size() == 7);
  CHECK_FALSE(arch.relu_on_embedding);
}

TEST_CASE("config: unknown keys and type errors are rejected") {
  Config cfg = Config::defaults();
  CHECK_THROWS_WITH_AS(cfg.set("learning_rate", "0.1"),
                       doctest::Contains("unknown key"), Error);
  CHECK_THROWS_WITH_AS(cfg.set("batch_size", "abc"),
                       doctest::Contains("expects an integer"), Error);
  CHECK_THROWS_WITH_AS(cfg.set("lr0", "fast"),
                       doctest::Contains("expects a number"), Error);
}

TEST_CASE("config: batch_size=0 fails validation") {
  Config cfg = Config::defaults();
  cfg.set("batch_size", "0");
  CHECK_THROWS_AS(cfg.train_config(), Error);
}

TEST_CASE("config: flags override file values") {
  TempDir dir("cfg");
  std::ofstream(dir.file("run.cfg")) << "# comment\nlr0=0.1\nbatch_size=64\n";
  Config cfg = Config::load(dir.file("run.cfg"));
  CHECK(cfg.get_double("lr0") == 0.1);
  cfg.set("lr0", "0.05");  // flag override lands after the file
  CHECK(cfg.get_double("lr0") == 0.05);
  CHECK(cfg.get_int("batch_size") == 64);
}

TEST_CASE("config: file errors carry the line number") {
  TempDir dir("cfgerr");
  std::ofstream(dir.file("bad.cfg")) << "lr0=0.1\nbogus_key=3\n";
  CHECK_THROWS_WITH_AS(Config::load(dir.file("bad.cfg")),
                       doctest::Contains(":2:"), Error);
}

TEST_CASE("config: SIAMZERO_SEED is the seed fallback") {
  setenv("SIAMZERO_SEED", "777", 1);
  const Config cfg = Config::defaults();
  CHECK(cfg.get_int("seed") == 777);
  unsetenv("SIAMZERO_SEED");

  Config explicit_cfg = Config::defaults();
  explicit_cfg.set("seed", "5");
  CHECK(explicit_cfg.get_int("seed") == 5);
}

TEST_CASE("config: embed_activation is validated") {
  Config cfg = Config::defaults();
  cfg.set("embed_activation", "relu");
  CHECK(cfg.arch().relu_on_embedding);
  cfg.set("embed_activation", "tanh");
  CHECK_THROWS_AS(cfg.arch(), Error);
}

TEST_CASE("config: resolved text lists every key once") {
  const Config cfg = Config::defaults();
  const std::string text = cfg.resolved_text();
  CHECK(text.find("lr0=0.1") != std::string::npos);
  CHECK(text.find("batch_size=256") != std::string::npos);
  CHECK(text.find("conv=32x3,pool") != std::string::npos);
}
