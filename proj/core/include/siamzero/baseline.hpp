#pragma once

#include "siamzero/dataset.hpp"
#include "siamzero/model.hpp"
#include "siamzero/train.hpp"

namespace siamzero {

/// The character-based comparison classifier: the same backbone with the
/// similarity head replaced by a C-way dense layer, trained with softmax
/// cross entropy on all classes' train samples.
struct BaselineModel {
  SiameseModel backbone;
  Tensor cls_weight;  // (C, 128)
  Tensor cls_bias;    // (C)
  int num_classes = 0;
};

BaselineModel train_softmax_baseline(const ArchitectureSpec& spec,
                                     const Dataset& data, const DataSplit& split,
                                     const TrainConfig& config,
                                     std::vector<EpochStats>* history = nullptr);

/// Closed-set accuracy of the baseline on the test samples.
double evaluate_closed(BaselineModel& model, const Dataset& data,
                       const DataSplit& split);

/// Closed-set accuracy of the template-matching classifier on the same
/// test samples (full label space).
double evaluate_closed_template(SiameseModel& model, const Dataset& data,
                                const DataSplit& split);

}  // namespace siamzero
