#include "siamzero/eval.hpp"

#include <algorithm>
#include <iomanip>

#include "siamzero/matcher.hpp"

namespace siamzero {

EvalReport evaluate(SiameseModel& model, const Dataset& data,
                    const DataSplit& split) {
  EvalReport report;
  report.c_total = data.num_classes();
  report.c_seen = split.classes.c_seen;

  std::vector<std::pair<int, const NormalizedImage*>> templates;
  for (int id : data.class_ids())
    templates.emplace_back(id, &data.templates[static_cast<std::size_t>(id)]);
  const TemplateMatrix matrix = build_template_matrix(model, templates);
  const auto w = model.head_weight();
  const float b = model.head_bias();

  const std::set<int> seen_set(split.classes.seen.begin(),
                               split.classes.seen.end());
  const std::set<int> unseen_set(split.classes.unseen.begin(),
                                 split.classes.unseen.end());

  const auto run_population = [&](const std::vector<int>& classes,
                                  const std::set<int>& restricted_ids,
                                  AccCell& restricted_cell, AccCell& full_cell) {
    for (int cls : classes) {
      const auto& idx = split.test_indices[static_cast<std::size_t>(cls)];
      if (idx.empty()) continue;
      std::vector<const NormalizedImage*> imgs;
      for (int i : idx)
        imgs.push_back(&data.samples[static_cast<std::size_t>(cls)]
                                    [static_cast<std::size_t>(i)]);
      const Tensor feats = model.embed(images_to_tensor(imgs), Mode::kInfer);
      for (std::size_t q = 0; q < imgs.size(); ++q) {
        const std::span<const float> f{feats.data.data() + q * kEmbedDim,
                                       static_cast<std::size_t>(kEmbedDim)};
        const auto full = classify(f, matrix, w, b);
        full_cell.total++;
        if (full.class_id == cls) full_cell.correct++;
        auto& cell = report.confusion[{cls, full.class_id}];
        if (cell.count == 0) {
          cell.truth = cls;
          cell.pred = full.class_id;
          cell.exemplar = data.sample_refs[static_cast<std::size_t>(cls)]
                                          [static_cast<std::size_t>(idx[q])];
        }
        cell.count++;
        const auto restricted = classify_restricted(f, matrix, w, b, restricted_ids);
        restricted_cell.total++;
        if (restricted.class_id == cls) restricted_cell.correct++;
      }
    }
  };

  run_population(split.classes.seen, seen_set, report.ds_cs, report.ds_c);
  if (!split.classes.unseen.empty())
    run_population(split.classes.unseen, unseen_set, report.du_cu, report.du_c);

  // D|C is the sample-weighted combination of the two full-space populations.
  report.d_c.correct = report.ds_c.correct + report.du_c.correct;
  report.d_c.total = report.ds_c.total + report.du_c.total;
  return report;
}

std::vector<ConfusionCell> error_report(const EvalReport& report, int k) {
  std::vector<ConfusionCell> cells;
  for (const auto& [key, cell] : report.confusion)
    if (cell.truth != cell.pred) cells.push_back(cell);
  std::sort(cells.begin(), cells.end(),
            [](const ConfusionCell& a, const ConfusionCell& b) {
              if (a.count != b.count) return a.count > b.count;
              if (a.truth != b.truth) return a.truth < b.truth;
              return a.pred < b.pred;
            });
  if (static_cast<int>(cells.size()) > k)
    cells.resize(static_cast<std::size_t>(k));
  return cells;
}

namespace {

void put_cell(std::ostream& out, const AccCell& cell) {
  if (cell.valid())
    out << '\t' << std::fixed << std::setprecision(4) << cell.value();
  else
    out << "\t-";
}

}  // namespace

void write_report_tsv(const EvalReport& report, std::ostream& out) {
  out << "c\tDs|Cs\tDs|C\tDu|Cu\tDu|C\tD|C\n";
  out << report.c_seen;
  put_cell(out, report.ds_cs);
  put_cell(out, report.ds_c);
  put_cell(out, report.du_cu);
  put_cell(out, report.du_c);
  put_cell(out, report.d_c);
  out << '\n';
}

}  // namespace siamzero
