#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "siamzero/dataset.hpp"
#include "siamzero/model.hpp"

namespace siamzero {

struct AccCell {
  std::int64_t correct = 0;
  std::int64_t total = 0;

  double value() const {
    return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  }
  bool valid() const { return total > 0; }
};

struct ConfusionCell {
  int truth = 0;
  int pred = 0;
  std::int64_t count = 0;
  std::string exemplar;  // source path of one misclassified sample
};

/// The five accuracy columns D_s|C_s, D_s|C, D_u|C_u, D_u|C, D|C plus
/// per-class (truth, prediction) counts collected under the full label
/// space, one exemplar path per cell.
struct EvalReport {
  int c_total = 0;
  int c_seen = 0;
  AccCell ds_cs, ds_c, du_cu, du_c, d_c;
  std::map<std::pair<int, int>, ConfusionCell> confusion;
};

/// Test-set evaluation: the restricted columns use classify_restricted over
/// the seen (resp. unseen) class set, the others the full template matrix.
EvalReport evaluate(SiameseModel& model, const Dataset& data,
                    const DataSplit& split);

/// k most frequent misclassification cells, count-descending, ties by
/// (truth, pred); may return fewer than k.
std::vector<ConfusionCell> error_report(const EvalReport& report, int k);

/// TSV mirror of the five-column accuracy scheme.
void write_report_tsv(const EvalReport& report, std::ostream& out);

}  // namespace siamzero
