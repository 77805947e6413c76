#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "siamzero/checkpoint.hpp"
#include "siamzero/template_matrix.hpp"
#include "testutil.hpp"

using testutil::TempDir;

namespace {

int run_cli(const std::string& args, const std::string& out_file) {
  const std::string cmd =
      std::string(SIAMZERO_CLI_PATH) + " " + args + " >" + out_file + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("cli: unknown subcommand exits 2 with usage text") {
  TempDir dir("cli2");
  const int code = run_cli("frobnicate", dir.file("out.txt"));
  CHECK(code == 2);
  CHECK(slurp(dir.file("out.txt")).find("Usage") != std::string::npos);
}

TEST_CASE("cli: domain errors exit 1 with a machine-parsable error line") {
  TempDir dir("cli1");
  const int code =
      run_cli("pairs --manifest /nonexistent.tsv --out " + dir.file("p.tsv"),
              dir.file("out.txt"));
  CHECK(code == 1);
  CHECK(slurp(dir.file("out.txt")).find("error: ") != std::string::npos);
}

TEST_CASE("cli: gen-toy rerun is bit-identical and prints its config") {
  TempDir dir("clitoy");
  REQUIRE(run_cli("gen-toy --out " + dir.file("a") + " --classes 3 --samples 2 --seed 7",
                  dir.file("out_a.txt")) == 0);
  REQUIRE(run_cli("gen-toy --out " + dir.file("b") + " --classes 3 --samples 2 --seed 7",
                  dir.file("out_b.txt")) == 0);
  CHECK(slurp(dir.file("out_a.txt")).find("[siamzero] config: seed=7") !=
        std::string::npos);
  CHECK(testutil::file_bytes_equal(dir.file("a") + "/manifest.tsv",
                                   dir.file("b") + "/manifest.tsv"));
  CHECK(testutil::file_bytes_equal(dir.file("a") + "/images/c0_s0.pgm",
                                   dir.file("b") + "/images/c0_s0.pgm"));
  CHECK(testutil::file_bytes_equal(dir.file("a") + "/templates/class_2.pgm",
                                   dir.file("b") + "/templates/class_2.pgm"));
}

TEST_CASE("cli: pairs writes the seed/n header and the record lines") {
  TempDir dir("clipairs");
  REQUIRE(run_cli("gen-toy --out " + dir.file("d") + " --classes 3 --samples 4 --seed 9",
                  dir.file("gen.txt")) == 0);
  REQUIRE(run_cli("pairs --manifest " + dir.file("d") + "/manifest.tsv --n 2 --seed 5 --out " +
                      dir.file("p.tsv"),
                  dir.file("out.txt")) == 0);
  const std::string tsv = slurp(dir.file("p.tsv"));
  CHECK(tsv.find("# seed=5 n=2") == 0);
  // 3*4 positives + 3*2*2 negatives
  int lines = 0;
  for (char c : tsv)
    if (c == '\n') ++lines;
  CHECK(lines == 1 + 12 + 12);
}

TEST_CASE("cli: classify and export-features run against a saved checkpoint") {
  TempDir dir("clicls");
  REQUIRE(run_cli("gen-toy --out " + dir.file("d") + " --classes 3 --samples 2 --seed 21",
                  dir.file("gen.txt")) == 0);

  // a freshly initialized model is a valid checkpoint for the wire formats
  siamzero::SiameseModel model(siamzero::ArchitectureSpec::default_spec(), 77);
  siamzero::save_checkpoint(model.params(), dir.file("m.szck"));

  REQUIRE(run_cli("classify --checkpoint " + dir.file("m.szck") + " --templates " +
                      dir.file("d") + "/templates.tsv --image " + dir.file("d") +
                      "/images/c1_s0.pgm --restrict 0,1",
                  dir.file("cls.txt")) == 0);
  const std::string out = slurp(dir.file("cls.txt"));
  CHECK(out.find("class ") != std::string::npos);
  CHECK(out.find("p=") != std::string::npos);

  REQUIRE(run_cli("export-features --checkpoint " + dir.file("m.szck") +
                      " --templates " + dir.file("d") + "/templates.tsv --out " +
                      dir.file("f.szfm"),
                  dir.file("exp.txt")) == 0);
  const siamzero::TemplateMatrix m =
      siamzero::read_feature_matrix(dir.file("f.szfm"));
  CHECK(m.rows() == 3);
  CHECK(m.class_ids == std::vector<int>{0, 1, 2});
}

TEST_CASE("cli: prep writes normalized SZIM images and a manifest") {
  TempDir dir("cliprep");
  REQUIRE(run_cli("gen-toy --out " + dir.file("d") + " --classes 2 --samples 2 --seed 3",
                  dir.file("gen.txt")) == 0);
  REQUIRE(run_cli("prep --in " + dir.file("d") + " --manifest " + dir.file("d") +
                      "/manifest.tsv --out " + dir.file("norm"),
                  dir.file("out.txt")) == 0);
  CHECK(std::filesystem::exists(dir.file("norm") + "/images/c0_s0.szim"));
  CHECK(std::filesystem::exists(dir.file("norm") + "/manifest.tsv"));
  const siamzero::NormalizedImage img =
      siamzero::read_normalized(dir.file("norm") + "/images/c1_s1.szim");
  float hi = 0.0f;
  for (float v : img.pixels) hi = std::max(hi, v);
  CHECK(hi > 0.0f);
  CHECK(hi <= 1.0f);
}
