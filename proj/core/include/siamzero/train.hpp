#pragma once

#include <string>
#include <vector>

#include "siamzero/dataset.hpp"
#include "siamzero/model.hpp"
#include "siamzero/pairs.hpp"

namespace siamzero {

struct TrainConfig {
  int batch_size = 256;
  float lr0 = 0.1f;
  float lr_decay = 0.1f;
  int plateau_patience = 3;
  float momentum = 0.9f;
  float weight_decay = 1e-4f;
  int max_epochs = 100;
  std::uint64_t seed = 0;
  int negatives_per_cell = 5;  // Algorithm-1 n
  float train_frac = 0.75f;

  void validate() const;
};

/// Multiply the learning rate by `factor` once the monitored accuracy has
/// not improved for `patience` epochs; stop after max_decays such decays
/// plus one more stale window.
class PlateauScheduler {
 public:
  PlateauScheduler(float lr0, float factor, int patience, int max_decays = 2);

  struct Decision {
    float lr;
    bool decayed = false;
    bool stop = false;
  };
  Decision observe(double metric);

  float lr() const { return lr_; }

 private:
  float lr_;
  float factor_;
  int patience_;
  int max_decays_;
  double best_;
  int stale_ = 0;
  int decays_ = 0;
};

struct EpochStats {
  int epoch = 0;
  float lr = 0.0f;
  double train_loss = 0.0;
  double monitor_acc = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  std::vector<float> first_step_losses;  // first 10 SGD step losses
};

/// Trains the siamese model on pairs drawn from the seen classes' train
/// samples. The monitored accuracy is unseen-class recognition on the
/// unseen train samples (template matrix restricted to the unseen classes);
/// in the closed-set case (no unseen classes) it falls back to seen-class
/// accuracy on the train samples.
TrainResult train(SiameseModel& model, const Dataset& data,
                  const DataSplit& split, const TrainConfig& config);

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::string& path);

/// Seen-class accuracy helper used by tests and the baseline comparison:
/// classify the listed samples against a template matrix over template_ids.
double matcher_accuracy(SiameseModel& model, const Dataset& data,
                        const std::vector<int>& template_ids,
                        const std::vector<int>& query_classes,
                        const std::vector<std::vector<int>>& indices);

}  // namespace siamzero
