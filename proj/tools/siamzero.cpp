// siamzero command line: dataset preparation, pair generation, training,
// evaluation and classification pipelines.
//
// Exit codes: 0 success, 1 domain error ("error: ..." on stderr), 2 usage.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "siamzero/baseline.hpp"
#include "siamzero/checkpoint.hpp"
#include "siamzero/config.hpp"
#include "siamzero/dataset.hpp"
#include "siamzero/eval.hpp"
#include "siamzero/gradcheck.hpp"
#include "siamzero/manifest.hpp"
#include "siamzero/matcher.hpp"
#include "siamzero/pairs.hpp"
#include "siamzero/pgm.hpp"
#include "siamzero/toygen.hpp"

namespace fs = std::filesystem;
using namespace siamzero;

namespace {

struct ConfigCli {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
};

/// Registers a flag that overrides one config key; flags win over the file.
void add_override(CLI::App* cmd, ConfigCli& cc, const std::string& flag,
                  const std::string& key, const std::string& desc) {
  cmd->add_option_function<std::string>(
      flag,
      [&cc, key](const std::string& v) { cc.overrides.emplace_back(key, v); },
      desc);
}

void add_config_options(CLI::App* cmd, ConfigCli& cc) {
  cmd->add_option("--config", cc.config_path, "key=value config file");
  add_override(cmd, cc, "--seed", "seed", "global seed");
  add_override(cmd, cc, "--batch-size", "batch_size", "pairs per SGD step");
  add_override(cmd, cc, "--lr0", "lr0", "initial learning rate");
  add_override(cmd, cc, "--lr-decay", "lr_decay", "plateau decay factor");
  add_override(cmd, cc, "--patience", "plateau_patience", "plateau patience epochs");
  add_override(cmd, cc, "--momentum", "momentum", "SGD momentum");
  add_override(cmd, cc, "--weight-decay", "weight_decay", "L2 multiplier");
  add_override(cmd, cc, "--max-epochs", "max_epochs", "epoch cap");
  add_override(cmd, cc, "--n", "n", "negatives per class pair");
  add_override(cmd, cc, "--c-seen", "c_seen", "seen classes (0 = all)");
  add_override(cmd, cc, "--train-frac", "train_frac", "per-class train fraction");
  add_override(cmd, cc, "--conv", "conv", "conv architecture string");
  add_override(cmd, cc, "--embed-activation", "embed_activation",
               "activation on the 128-dim embedding (none|relu)");
  add_override(cmd, cc, "--threshold", "threshold", "crop threshold");
}

Config resolve_config(const ConfigCli& cc) {
  Config cfg = cc.config_path.empty() ? Config::defaults()
                                      : Config::load(cc.config_path);
  for (const auto& [k, v] : cc.overrides) cfg.set(k, v);
  return cfg;
}

void print_header(const std::string& subcommand, const Config& cfg) {
  std::cout << "[siamzero] subcommand=" << subcommand << "\n";
  std::istringstream lines(cfg.resolved_text());
  std::string line;
  while (std::getline(lines, line))
    std::cout << "[siamzero] config: " << line << "\n";
}

std::vector<std::pair<int, const NormalizedImage*>> template_refs(
    const Dataset& data) {
  std::vector<std::pair<int, const NormalizedImage*>> t;
  for (int id : data.class_ids())
    t.emplace_back(id, &data.templates[static_cast<std::size_t>(id)]);
  return t;
}

/// Loads a template manifest (paths relative to the manifest's directory)
/// and preprocesses every image.
std::vector<std::pair<int, NormalizedImage>> load_templates(
    const std::string& manifest_path, int threshold) {
  const Manifest m = load_manifest(manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();
  std::vector<std::pair<int, NormalizedImage>> out;
  for (const auto& e : m.entries)
    out.emplace_back(e.class_id,
                     preprocess(load_pgm((base / e.path).string()), threshold));
  return out;
}

int run_prep(const ConfigCli& cc, const std::string& in_dir,
             const std::string& manifest_path, const std::string& out_dir) {
  const Config cfg = resolve_config(cc);
  print_header("prep", cfg);
  const int threshold = static_cast<int>(cfg.get_int("threshold"));

  const Manifest m = load_manifest(manifest_path);
  fs::create_directories(out_dir);
  Manifest out_m;
  for (const auto& e : m.entries) {
    const NormalizedImage norm =
        preprocess(load_pgm((fs::path(in_dir) / e.path).string()), threshold);
    fs::path rel(e.path);
    rel.replace_extension(".szim");
    fs::create_directories((fs::path(out_dir) / rel).parent_path());
    write_normalized(norm, (fs::path(out_dir) / rel).string());
    out_m.entries.push_back({rel.string(), e.class_id});
  }
  save_manifest(out_m, (fs::path(out_dir) / "manifest.tsv").string());
  std::cout << "wrote " << out_m.entries.size() << " normalized images to "
            << out_dir << "\n";
  return 0;
}

int run_pairs(const ConfigCli& cc, const std::string& manifest_path,
              const std::string& out_path) {
  const Config cfg = resolve_config(cc);
  print_header("pairs", cfg);

  const Manifest m = load_manifest(manifest_path);
  std::vector<int> sizes(static_cast<std::size_t>(m.num_classes()), 0);
  for (const auto& e : m.entries) sizes[static_cast<std::size_t>(e.class_id)]++;

  const PairList pairs =
      generate_pairs(sizes, static_cast<int>(cfg.get_int("n")),
                     static_cast<std::uint64_t>(cfg.get_int("seed")));
  write_pairs_tsv(pairs, out_path);
  const auto [pos, neg] = pair_counts(sizes, static_cast<int>(cfg.get_int("n")));
  std::cout << "wrote " << pairs.records.size() << " pairs (" << pos
            << " positive, " << neg << " negative) to " << out_path << "\n";
  return 0;
}

int run_train(const ConfigCli& cc, const std::string& data_dir,
              const std::string& out_dir, bool with_baseline) {
  const Config cfg = resolve_config(cc);
  print_header("train", cfg);

  const TrainConfig tc = cfg.train_config();
  const ArchitectureSpec arch = cfg.arch();
  const Dataset data = load_dataset(data_dir, "manifest.tsv", "templates.tsv",
                                    static_cast<int>(cfg.get_int("threshold")));

  int c_seen = static_cast<int>(cfg.get_int("c_seen"));
  if (c_seen == 0) c_seen = data.num_classes();
  const DataSplit split = make_split(data, c_seen, tc.seed, tc.train_frac);

  SiameseModel model(arch, mix_seed(tc.seed, 0x171aULL));
  const TrainResult result = train(model, data, split, tc);

  fs::create_directories(out_dir);
  save_checkpoint(model.params(), (fs::path(out_dir) / "checkpoint.szck").string());
  write_history_csv(result.history, (fs::path(out_dir) / "history.csv").string());
  {
    std::ofstream steps((fs::path(out_dir) / "steps.csv").string());
    steps << "step,loss\n" << std::hexfloat;
    for (std::size_t i = 0; i < result.first_step_losses.size(); ++i)
      steps << i << ',' << result.first_step_losses[i] << '\n';
  }

  const EvalReport report = evaluate(model, data, split);
  {
    std::ofstream out((fs::path(out_dir) / "report.tsv").string());
    write_report_tsv(report, out);
  }
  write_report_tsv(report, std::cout);

  if (with_baseline) {
    BaselineModel baseline = train_softmax_baseline(arch, data, split, tc, nullptr);
    const double softmax_acc = evaluate_closed(baseline, data, split);
    const double template_acc = evaluate_closed_template(model, data, split);
    std::cout << "closed-set comparison:\ttemplate-matching=" << template_acc
              << "\tcharacter-based=" << softmax_acc << "\n";
    std::ofstream out((fs::path(out_dir) / "comparison.tsv").string());
    out << "classifier\taccuracy\n";
    out << "template-matching\t" << template_acc << "\n";
    out << "character-based\t" << softmax_acc << "\n";
  }
  std::cout << "wrote " << (fs::path(out_dir) / "checkpoint.szck").string()
            << "\n";
  return 0;
}

int run_eval(const ConfigCli& cc, const std::string& data_dir,
             const std::string& checkpoint_path, const std::string& out_path,
             int errors_k) {
  const Config cfg = resolve_config(cc);
  print_header("eval", cfg);

  const TrainConfig tc = cfg.train_config();
  const ArchitectureSpec arch = cfg.arch();
  const Dataset data = load_dataset(data_dir, "manifest.tsv", "templates.tsv",
                                    static_cast<int>(cfg.get_int("threshold")));
  int c_seen = static_cast<int>(cfg.get_int("c_seen"));
  if (c_seen == 0) c_seen = data.num_classes();
  const DataSplit split = make_split(data, c_seen, tc.seed, tc.train_frac);

  SiameseModel model(arch, load_checkpoint(checkpoint_path));
  const EvalReport report = evaluate(model, data, split);
  write_report_tsv(report, std::cout);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    write_report_tsv(report, out);
  }
  if (errors_k > 0) {
    std::cout << "top-" << errors_k << " confusions (truth, prediction, count, exemplar):\n";
    for (const auto& cell : error_report(report, errors_k))
      std::cout << cell.truth << '\t' << cell.pred << '\t' << cell.count << '\t'
                << cell.exemplar << "\n";
  }
  return 0;
}

int run_classify(const ConfigCli& cc, const std::string& checkpoint_path,
                 const std::string& templates_path, const std::string& image_path,
                 const std::string& restrict_ids) {
  const Config cfg = resolve_config(cc);
  print_header("classify", cfg);

  SiameseModel model(cfg.arch(), load_checkpoint(checkpoint_path));
  const int threshold = static_cast<int>(cfg.get_int("threshold"));
  const auto templates = load_templates(templates_path, threshold);
  std::vector<std::pair<int, const NormalizedImage*>> refs;
  for (const auto& [id, img] : templates) refs.emplace_back(id, &img);
  const TemplateMatrix matrix = build_template_matrix(model, refs);

  const NormalizedImage query = preprocess(load_pgm(image_path), threshold);
  const Tensor feat = model.embed(images_to_tensor({&query}), Mode::kInfer);
  const std::span<const float> f{feat.data.data(),
                                 static_cast<std::size_t>(kEmbedDim)};

  Classification result;
  if (restrict_ids.empty()) {
    result = classify(f, matrix, model.head_weight(), model.head_bias());
  } else {
    std::set<int> allowed;
    std::stringstream ss(restrict_ids);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) allowed.insert(std::stoi(tok));
    result = classify_restricted(f, matrix, model.head_weight(),
                                 model.head_bias(), allowed);
  }
  std::cout << "class " << result.class_id << " p=" << result.probability << "\n";
  return 0;
}

int run_export_features(const ConfigCli& cc, const std::string& checkpoint_path,
                        const std::string& templates_path,
                        const std::string& out_path) {
  const Config cfg = resolve_config(cc);
  print_header("export-features", cfg);

  SiameseModel model(cfg.arch(), load_checkpoint(checkpoint_path));
  const auto templates =
      load_templates(templates_path, static_cast<int>(cfg.get_int("threshold")));
  std::vector<std::pair<int, const NormalizedImage*>> refs;
  for (const auto& [id, img] : templates) refs.emplace_back(id, &img);
  write_feature_matrix(build_template_matrix(model, refs), out_path);
  std::cout << "wrote " << refs.size() << "x" << kEmbedDim
            << " feature matrix to " << out_path << "\n";
  return 0;
}

int run_gradcheck(std::uint64_t seed, int seeds, float eps) {
  std::cout << "[siamzero] subcommand=gradcheck\n"
            << "[siamzero] config: seed=" << seed << "\n"
            << "[siamzero] config: seeds=" << seeds << "\n"
            << "[siamzero] config: eps=" << eps << "\n";
  bool ok = true;
  for (const auto& r : run_gradcheck_suites(seed, seeds, eps)) {
    const bool pass = r.max_rel_err <= kGradCheckTolerance;
    ok = ok && pass;
    std::cout << r.op << "\tmax_rel_err=" << r.max_rel_err << "\t"
              << (pass ? "ok" : "FAIL") << "\n";
  }
  if (!ok) fail("gradient check exceeded tolerance");
  return 0;
}

int run_gen_toy(const std::string& out_dir, int classes, int samples,
                std::uint64_t seed, int complexity) {
  std::cout << "[siamzero] subcommand=gen-toy\n"
            << "[siamzero] config: classes=" << classes << "\n"
            << "[siamzero] config: samples=" << samples << "\n"
            << "[siamzero] config: seed=" << seed << "\n"
            << "[siamzero] config: complexity=" << complexity << "\n";
  write_toy_dataset(out_dir, classes, samples, seed, complexity);
  std::cout << "wrote " << classes << " classes x " << samples << " samples to "
            << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"siamzero: siamese template-matching character recognizer"};
  app.require_subcommand(1);

  ConfigCli cc;

  // prep
  auto* prep_cmd = app.add_subcommand("prep", "preprocess a raw PGM dataset");
  std::string prep_in, prep_manifest, prep_out;
  prep_cmd->add_option("--in", prep_in, "input image directory")->required();
  prep_cmd->add_option("--manifest", prep_manifest, "TSV manifest")->required();
  prep_cmd->add_option("--out", prep_out, "output directory")->required();
  add_config_options(prep_cmd, cc);

  // pairs
  auto* pairs_cmd = app.add_subcommand("pairs", "generate training pairs");
  std::string pairs_manifest, pairs_out;
  pairs_cmd->add_option("--manifest", pairs_manifest, "TSV manifest")->required();
  pairs_cmd->add_option("--out", pairs_out, "output pairs TSV")->required();
  add_config_options(pairs_cmd, cc);

  // train
  auto* train_cmd = app.add_subcommand("train", "train the siamese model");
  std::string train_data, train_out;
  bool with_baseline = false;
  train_cmd->add_option("--data", train_data, "dataset directory")->required();
  train_cmd->add_option("--out", train_out, "output directory")->required();
  train_cmd->add_flag("--with-baseline", with_baseline,
                      "also train the character-based comparison classifier");
  add_config_options(train_cmd, cc);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_data, eval_checkpoint, eval_out;
  int eval_errors = 0;
  eval_cmd->add_option("--data", eval_data, "dataset directory")->required();
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "SZCK checkpoint")->required();
  eval_cmd->add_option("--out", eval_out, "write the report TSV here");
  eval_cmd->add_option("--errors", eval_errors, "print the top-k confusion cells");
  add_config_options(eval_cmd, cc);

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "classify one image");
  std::string cls_checkpoint, cls_templates, cls_image, cls_restrict;
  classify_cmd->add_option("--checkpoint", cls_checkpoint, "SZCK checkpoint")->required();
  classify_cmd->add_option("--templates", cls_templates, "template manifest TSV")->required();
  classify_cmd->add_option("--image", cls_image, "query PGM image")->required();
  classify_cmd->add_option("--restrict", cls_restrict,
                           "comma-separated candidate class ids");
  add_config_options(classify_cmd, cc);

  // export-features
  auto* export_cmd =
      app.add_subcommand("export-features", "write the template feature matrix");
  std::string exp_checkpoint, exp_templates, exp_out;
  export_cmd->add_option("--checkpoint", exp_checkpoint, "SZCK checkpoint")->required();
  export_cmd->add_option("--templates", exp_templates, "template manifest TSV")->required();
  export_cmd->add_option("--out", exp_out, "output SZFM path")->required();
  add_config_options(export_cmd, cc);

  // gradcheck
  auto* grad_cmd = app.add_subcommand("gradcheck", "run the gradient suites");
  std::uint64_t grad_seed = 20240901;
  int grad_seeds = 3;
  float grad_eps = 1e-3f;
  grad_cmd->add_option("--seed", grad_seed, "base seed");
  grad_cmd->add_option("--seeds", grad_seeds, "seeded shapes per op");
  grad_cmd->add_option("--eps", grad_eps, "central-difference step");

  // gen-toy
  auto* toy_cmd = app.add_subcommand("gen-toy", "generate the synthetic dataset");
  std::string toy_out;
  int toy_classes = 10, toy_samples = 20, toy_complexity = 4;
  std::uint64_t toy_seed = 7;
  toy_cmd->add_option("--out", toy_out, "output directory")->required();
  toy_cmd->add_option("--classes", toy_classes, "glyph classes");
  toy_cmd->add_option("--samples", toy_samples, "samples per class");
  toy_cmd->add_option("--seed", toy_seed, "generator seed");
  toy_cmd->add_option("--complexity", toy_complexity, "strokes per glyph");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help() << std::flush;
    return 2;
  }

  try {
    if (prep_cmd->parsed()) return run_prep(cc, prep_in, prep_manifest, prep_out);
    if (pairs_cmd->parsed()) return run_pairs(cc, pairs_manifest, pairs_out);
    if (train_cmd->parsed())
      return run_train(cc, train_data, train_out, with_baseline);
    if (eval_cmd->parsed())
      return run_eval(cc, eval_data, eval_checkpoint, eval_out, eval_errors);
    if (classify_cmd->parsed())
      return run_classify(cc, cls_checkpoint, cls_templates, cls_image, cls_restrict);
    if (export_cmd->parsed())
      return run_export_features(cc, exp_checkpoint, exp_templates, exp_out);
    if (grad_cmd->parsed()) return run_gradcheck(grad_seed, grad_seeds, grad_eps);
    if (toy_cmd->parsed())
      return run_gen_toy(toy_out, toy_classes, toy_samples, toy_seed, toy_complexity);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
