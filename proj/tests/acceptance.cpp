// Acceptance suite: one checkable criterion per function, each printing a
// single [PASS]/[FAIL] line. Run all with no arguments or one with
// --criterion N. Exit 0 iff everything requested passed.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "siamzero/baseline.hpp"
#include "siamzero/eval.hpp"
#include "siamzero/gradcheck.hpp"
#include "siamzero/matcher.hpp"
#include "siamzero/pairs.hpp"
#include "siamzero/prep.hpp"
#include "siamzero/toygen.hpp"
#include "siamzero/train.hpp"

using namespace siamzero;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

Dataset toy_dataset(int classes, int samples, std::uint64_t seed,
                    int complexity = 4, double min_distance = 0.02) {
  Dataset data;
  const auto specs = gen_charset(classes, seed, complexity, min_distance);
  data.samples.resize(static_cast<std::size_t>(classes));
  data.sample_refs.resize(static_cast<std::size_t>(classes));
  for (const auto& spec : specs) {
    data.templates.push_back(preprocess(render_template(spec)));
    for (int i = 0; i < samples; ++i) {
      data.samples[static_cast<std::size_t>(spec.class_id)].push_back(
          preprocess(render_sample(spec, static_cast<std::uint64_t>(i))));
      data.sample_refs[static_cast<std::size_t>(spec.class_id)].push_back(
          "c" + std::to_string(spec.class_id) + "_s" + std::to_string(i));
    }
  }
  return data;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness across the operator suites.
Outcome criterion_gradients() {
  Outcome out;
  const auto reports = run_gradcheck_suites(/*seed=*/20240901, /*seeds=*/5,
                                            /*eps=*/1e-3f);
  out.expect(reports.size() == 5, "expected 5 operator suites");
  for (const auto& r : reports) {
    out.expect(r.seeds == 5, r.op + ": wanted 5 seeded shapes");
    out.expect(r.max_rel_err <= kGradCheckTolerance,
               r.op + " max rel err " + fmt(r.max_rel_err) + " > 0.01");
    out.detail += (out.detail.empty() ? "" : ", ") + r.op + "=" + fmt(r.max_rel_err);
  }
  return out;
}

// ---------------------------------------------------------------------------
// 2. Pair accounting: closed form, exact, plus the n*c^2 identity.
Outcome criterion_pair_accounting() {
  Outcome out;
  for (int c : {1, 2, 5, 10}) {
    for (int n : {1, 3, 5}) {
      // mixed per-class sizes, all >= n
      std::vector<int> sizes;
      for (int i = 0; i < c; ++i) sizes.push_back(n + (i % 3));
      const PairList pairs = generate_pairs(sizes, n, 1000 + c * 10 + n);
      std::int64_t pos = 0, neg = 0;
      for (const auto& r : pairs.records) (r.label ? pos : neg)++;
      const auto [want_pos, want_neg] = pair_counts(sizes, n);
      out.expect(pos == want_pos, "positives mismatch at c=" + std::to_string(c) +
                                      " n=" + std::to_string(n));
      out.expect(neg == want_neg, "negatives mismatch at c=" + std::to_string(c) +
                                      " n=" + std::to_string(n));
      std::int64_t sum = 0;
      for (int m : sizes) sum += m;
      out.expect(want_pos == sum, "closed-form positives");
      out.expect(want_neg == static_cast<std::int64_t>(c) * (c - 1) * n,
                 "closed-form negatives");

      // uniform m = n: the n*c^2 total
      const std::vector<int> uniform(static_cast<std::size_t>(c), n);
      const PairList upairs = generate_pairs(uniform, n, 2000 + c * 10 + n);
      out.expect(static_cast<std::int64_t>(upairs.records.size()) ==
                     static_cast<std::int64_t>(n) * c * c,
                 "n*c^2 identity at c=" + std::to_string(c) +
                     " n=" + std::to_string(n));
    }
  }
  out.detail = "grid c in {1,2,5,10} x n in {1,3,5}, exact";
  return out;
}

// ---------------------------------------------------------------------------
// 3. Cache/direct classification equivalence on a trained toy checkpoint.
Outcome criterion_cache_direct() {
  Outcome out;
  const int classes = 6;
  Dataset data = toy_dataset(classes, 8, 31);
  const DataSplit split = make_split(data, classes, 3, 0.75f);

  SiameseModel model(ArchitectureSpec::default_spec(), 17);
  TrainConfig config;
  config.batch_size = 16;
  config.max_epochs = 2;
  config.negatives_per_cell = 2;
  config.seed = 3;
  train(model, data, split, config);

  std::vector<std::pair<int, const NormalizedImage*>> templates;
  for (int id : data.class_ids())
    templates.emplace_back(id, &data.templates[static_cast<std::size_t>(id)]);
  const TemplateMatrix matrix = build_template_matrix(model, templates);

  const auto specs = gen_charset(classes, 31, 4);
  int identical = 0;
  for (int q = 0; q < 100; ++q) {
    const NormalizedImage query = preprocess(
        render_sample(specs[static_cast<std::size_t>(q % classes)],
                      static_cast<std::uint64_t>(500 + q)));
    const Tensor f = model.embed(images_to_tensor({&query}), Mode::kInfer);
    const Classification cached =
        classify({f.data.data(), static_cast<std::size_t>(kEmbedDim)}, matrix,
                 model.head_weight(), model.head_bias());
    const Classification direct = classify_direct(query, templates, model);
    if (cached.class_id == direct.class_id &&
        cached.probability == direct.probability)
      ++identical;
  }
  out.expect(identical == 100,
             "only " + std::to_string(identical) + "/100 queries bit-identical");
  out.detail = std::to_string(identical) + "/100 queries identical";
  return out;
}

// ---------------------------------------------------------------------------
// 4. Closed-set desk-scale learning: 10x20 fixture, seen accuracy >= 0.90.
Outcome criterion_closed_set() {
  Outcome out;
  Dataset data = toy_dataset(10, 20, 4242);
  const DataSplit split = make_split(data, 10, 7, 0.75f);

  SiameseModel model(ArchitectureSpec::default_spec(), 1001);
  TrainConfig config;  // defaults scaled to the fixture
  config.batch_size = 32;
  config.max_epochs = 14;
  config.plateau_patience = 3;
  config.negatives_per_cell = 3;
  config.seed = 7;
  const TrainResult result = train(model, data, split, config);

  const EvalReport report = evaluate(model, data, split);
  out.expect(static_cast<int>(result.history.size()) <= 100, "epoch cap");
  out.expect(report.ds_cs.value() >= 0.90,
             "seen-class closed-set accuracy " + fmt(report.ds_cs.value()) +
                 " < 0.90");
  out.detail = "Ds|Cs=" + fmt(report.ds_cs.value()) + " after " +
               std::to_string(result.history.size()) + " epochs";
  return out;
}

// ---------------------------------------------------------------------------
// 5. Zero-shot generalization trend over c_seen in {6, 10, 14} of 16.
Outcome criterion_zero_shot() {
  Outcome out;
  const int classes = 16;
  // well-separated glyph programs; each run shares the fixture and seeds
  Dataset data = toy_dataset(classes, 20, 77, /*complexity=*/5,
                             /*min_distance=*/0.05);

  std::vector<double> unseen_acc;
  std::string runs;
  for (int c_seen : {6, 10, 14}) {
    const DataSplit split = make_split(data, c_seen, 5, 0.75f);
    SiameseModel model(ArchitectureSpec::default_spec(), 2002);
    TrainConfig config;
    config.batch_size = 32;
    config.max_epochs = 24;
    config.plateau_patience = 3;
    config.negatives_per_cell = 3;
    // gentler rate and stronger decay than the closed-set recipe: zero-shot
    // transfer peaks and then erodes once the pair loss is memorized
    config.lr0 = 0.05f;
    config.weight_decay = 1e-3f;
    config.seed = 11;  // shared seed protocol across the three runs
    train(model, data, split, config);
    const EvalReport report = evaluate(model, data, split);

    const double acc = report.du_cu.value();
    const double chance = 1.0 / static_cast<double>(classes - c_seen);
    // 5x chance, capped at 1.0 where 5/|Cu| exceeds certainty
    const double threshold = std::min(5.0 * chance, 1.0);
    out.expect(acc >= threshold, "c_seen=" + std::to_string(c_seen) + " Du|Cu " +
                                     fmt(acc) + " < " + fmt(threshold));
    unseen_acc.push_back(acc);
    runs += (runs.empty() ? "" : ", ") + std::to_string(c_seen) + ":" + fmt(acc);
  }
  out.expect(unseen_acc[0] <= unseen_acc[1] && unseen_acc[1] <= unseen_acc[2],
             "Du|Cu not non-decreasing in c_seen (" + runs + ")");
  out.detail = "Du|Cu by c_seen: " + runs;
  return out;
}

// ---------------------------------------------------------------------------
// 6. Restriction monotonicity on every evaluation run.
Outcome criterion_restriction() {
  Outcome out;
  Dataset data = toy_dataset(12, 10, 99);
  std::string details;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const DataSplit split = make_split(data, 7, seed, 0.75f);
    SiameseModel model(ArchitectureSpec::default_spec(), 300 + seed);
    // a lightly trained model so scores are not degenerate
    TrainConfig config;
    config.batch_size = 16;
    config.max_epochs = 1;
    config.negatives_per_cell = 2;
    config.seed = seed;
    train(model, data, split, config);

    const EvalReport report = evaluate(model, data, split);
    out.expect(report.du_cu.value() >= report.du_c.value(),
               "Du|Cu < Du|C at seed " + std::to_string(seed));
    out.expect(report.ds_cs.value() >= report.ds_c.value(),
               "Ds|Cs < Ds|C at seed " + std::to_string(seed));
    details += (details.empty() ? "" : "; ") + std::string("seed ") +
               std::to_string(seed) + ": Du|Cu=" + fmt(report.du_cu.value()) +
               " Du|C=" + fmt(report.du_c.value());
  }
  out.detail = details;
  return out;
}

// ---------------------------------------------------------------------------
// 7. Baseline comparison direction on the toy fixture.
Outcome criterion_baseline() {
  Outcome out;
  Dataset data = toy_dataset(10, 20, 4242);
  const DataSplit split = make_split(data, 10, 7, 0.75f);

  SiameseModel model(ArchitectureSpec::default_spec(), 1001);
  TrainConfig config;
  config.batch_size = 32;
  config.max_epochs = 10;
  config.negatives_per_cell = 3;
  config.seed = 7;
  train(model, data, split, config);
  const double template_acc = evaluate_closed_template(model, data, split);

  TrainConfig bl_config = config;
  bl_config.max_epochs = 12;
  // the cross-entropy head needs a gentler rate than the pair loss at this
  // batch size; 0.1 diverges on the desk-scale fixture
  bl_config.lr0 = 0.02f;
  BaselineModel baseline = train_softmax_baseline(ArchitectureSpec::default_spec(),
                                                  data, split, bl_config);
  const double softmax_acc = evaluate_closed(baseline, data, split);

  // side-by-side report line, then the 10-point directional band
  std::printf("        closed-set: template-matching=%s character-based=%s\n",
              fmt(template_acc).c_str(), fmt(softmax_acc).c_str());
  out.expect(softmax_acc >= template_acc - 0.10,
             "character-based " + fmt(softmax_acc) +
                 " more than 10 points below template-matching " +
                 fmt(template_acc));
  out.detail =
      "template=" + fmt(template_acc) + " softmax=" + fmt(softmax_acc);
  return out;
}

// ---------------------------------------------------------------------------
// 8. Determinism: two full CLI train runs, identical step losses and report.
Outcome criterion_determinism() {
  Outcome out;
  const fs::path dir =
      fs::temp_directory_path() / ("siamzero_accept8_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);

  const std::string cli = SIAMZERO_CLI_PATH;
  const auto shell = [&](const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  const std::string data = (dir / "data").string();
  out.expect(shell(cli + " gen-toy --out " + data +
                   " --classes 6 --samples 8 --seed 11") == 0,
             "gen-toy failed");
  const std::string train_args =
      " train --data " + data + " --seed 5 --c-seen 4 --n 2 --batch-size 8" +
      " --max-epochs 2 --out ";
  out.expect(shell(cli + train_args + (dir / "run1").string()) == 0, "run1 failed");
  out.expect(shell(cli + train_args + (dir / "run2").string()) == 0, "run2 failed");

  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  const std::string steps1 = slurp(dir / "run1" / "steps.csv");
  out.expect(!steps1.empty() && steps1 == slurp(dir / "run2" / "steps.csv"),
             "first-10-step losses differ");
  const std::string report1 = slurp(dir / "run1" / "report.tsv");
  out.expect(!report1.empty() && report1 == slurp(dir / "run2" / "report.tsv"),
             "final reports differ");
  const std::string ck1 = slurp(dir / "run1" / "checkpoint.szck");
  out.expect(!ck1.empty() && ck1 == slurp(dir / "run2" / "checkpoint.szck"),
             "checkpoints differ");
  out.detail = "steps.csv, report.tsv and checkpoint byte-identical";
  fs::remove_all(dir);
  return out;
}

// ---------------------------------------------------------------------------
// 9. Preprocessing conformance.
Outcome criterion_preprocessing() {
  Outcome out;
  out.expect(aspect_map(1.0) == 1.0, "aspect_map(1) != 1");
  out.expect(std::fabs(aspect_map(0.5) - 0.84090) <= 1e-4,
             "aspect_map(0.5) off: " + fmt(aspect_map(0.5)));

  Rng rng(7777);
  int involution_ok = 0;
  for (int t = 0; t < 1000; ++t) {
    const int w = 1 + static_cast<int>(rng.below(48));
    const int h = 1 + static_cast<int>(rng.below(48));
    GrayImage img(w, h);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    if (invert(invert(img)) == img) ++involution_ok;
  }
  out.expect(involution_ok == 1000, "invert involution failed on random images");

  const auto specs = gen_charset(10, 555, 4);
  int renders = 0, survived = 0;
  for (const auto& spec : specs) {
    for (int i = 0; i < 100; ++i) {
      ++renders;
      try {
        const NormalizedImage norm =
            preprocess(render_sample(spec, static_cast<std::uint64_t>(i)));
        bool in_range = norm.pixels.size() == std::size_t{64 * 64};
        for (float v : norm.pixels) in_range = in_range && v >= 0.0f && v <= 1.0f;
        if (in_range) ++survived;
      } catch (const Error&) {
      }
    }
  }
  out.expect(survived == renders, std::to_string(survived) + "/" +
                                      std::to_string(renders) +
                                      " renders survived preprocess");
  out.detail = "aspect_map ok, 1000 involutions, " + std::to_string(survived) +
               "/" + std::to_string(renders) + " renders preprocessed";
  return out;
}

struct Criterion {
  int number;
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "gradient correctness", criterion_gradients},
      {2, "pair accounting", criterion_pair_accounting},
      {3, "cache/direct equivalence", criterion_cache_direct},
      {4, "closed-set desk-scale learning", criterion_closed_set},
      {5, "zero-shot generalization trend", criterion_zero_shot},
      {6, "restriction monotonicity", criterion_restriction},
      {7, "baseline comparison direction", criterion_baseline},
      {8, "determinism", criterion_determinism},
      {9, "preprocessing conformance", criterion_preprocessing},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
      only = std::atoi(argv[++i]);
  }

  bool all_pass = true;
  for (const auto& c : criteria()) {
    if (only != 0 && c.number != only) continue;
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s%s%s\n", outcome.pass ? "PASS" : "FAIL",
                c.number, c.name, outcome.detail.empty() ? "" : " — ",
                outcome.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && outcome.pass;
  }
  return all_pass ? 0 : 1;
}
