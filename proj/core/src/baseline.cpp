#include "siamzero/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "siamzero/matcher.hpp"

namespace siamzero {

namespace {

struct Item {
  int cls;
  int index;
};

Tensor batch_tensor(const Dataset& data, const std::vector<Item>& items,
                    std::size_t start, std::size_t end) {
  std::vector<const NormalizedImage*> imgs;
  for (std::size_t i = start; i < end; ++i)
    imgs.push_back(&data.samples[static_cast<std::size_t>(items[i].cls)]
                                [static_cast<std::size_t>(items[i].index)]);
  return images_to_tensor(imgs);
}

int argmax_row(const float* row, int c) {
  int best = 0;
  for (int j = 1; j < c; ++j)
    if (row[j] > row[best]) best = j;  // ties keep the lowest class id
  return best;
}

double train_accuracy(BaselineModel& model, const Dataset& data,
                      const std::vector<Item>& items, int batch_size) {
  std::int64_t correct = 0;
  for (std::size_t start = 0; start < items.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end =
        std::min(items.size(), start + static_cast<std::size_t>(batch_size));
    const Tensor feats =
        model.backbone.embed(batch_tensor(data, items, start, end), Mode::kInfer);
    const Tensor logits = dense_forward(feats, model.cls_weight, model.cls_bias);
    for (std::size_t i = start; i < end; ++i) {
      const float* row = logits.data.data() +
                         static_cast<std::size_t>(i - start) * model.num_classes;
      if (argmax_row(row, model.num_classes) == items[i].cls) ++correct;
    }
  }
  return items.empty() ? 0.0
                       : static_cast<double>(correct) /
                             static_cast<double>(items.size());
}

}  // namespace

BaselineModel train_softmax_baseline(const ArchitectureSpec& spec,
                                     const Dataset& data, const DataSplit& split,
                                     const TrainConfig& config,
                                     std::vector<EpochStats>* history) {
  config.validate();
  const int c = data.num_classes();
  require(c >= 1, "baseline: empty dataset");

  BaselineModel model{
      SiameseModel(spec, mix_seed(config.seed, 0xba5eULL)),
      Tensor({c, kEmbedDim}),
      Tensor({c}),
      c,
  };
  {
    Rng rng(mix_seed(config.seed, 0xc1a55ULL));
    const float bound = std::sqrt(6.0f / static_cast<float>(kEmbedDim));
    for (auto& v : model.cls_weight.data) v = rng.uniform(-bound, bound);
  }
  model.cls_weight.ensure_grad();
  model.cls_bias.ensure_grad();

  std::vector<Item> items;
  for (int cls = 0; cls < c; ++cls)
    for (int i : split.train_indices[static_cast<std::size_t>(cls)])
      items.push_back({cls, i});
  require(!items.empty(), "baseline: no training samples");

  SgdState sgd;
  sgd.learning_rate = config.lr0;
  sgd.momentum = config.momentum;
  sgd.weight_decay = config.weight_decay;
  std::vector<float> vel_w, vel_b;

  PlateauScheduler scheduler(config.lr0, config.lr_decay, config.plateau_patience);

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    Rng shuffle_rng(mix_seed(config.seed, 0xe90c0 + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(items);
    const float epoch_lr = sgd.learning_rate;

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < items.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          items.size(), start + static_cast<std::size_t>(config.batch_size));
      const int bn = static_cast<int>(end - start);
      if (bn < 2) break;  // batch-norm train mode needs at least two rows

      std::vector<int> labels;
      for (std::size_t i = start; i < end; ++i) labels.push_back(items[i].cls);

      model.backbone.ensure_grads();
      model.backbone.zero_grads();
      model.cls_weight.ensure_grad();
      model.cls_weight.zero_grad();
      model.cls_bias.ensure_grad();
      model.cls_bias.zero_grad();

      EmbedTrace trace;
      const Tensor feats = model.backbone.embed(
          batch_tensor(data, items, start, end), Mode::kTrain, &trace);
      const Tensor logits = dense_forward(feats, model.cls_weight, model.cls_bias);
      Tensor probs;
      const float loss = softmax_xent_forward(logits, labels, &probs);
      const Tensor dlogits = softmax_xent_backward(probs, labels);
      DenseGrads dg = dense_backward(feats, model.cls_weight, dlogits);
      for (std::size_t i = 0; i < dg.dw.data.size(); ++i)
        model.cls_weight.grad[i] += dg.dw.data[i];
      for (std::size_t i = 0; i < dg.db.data.size(); ++i)
        model.cls_bias.grad[i] += dg.db.data[i];
      model.backbone.embed_backward(trace, dg.dx);

      sgd_step(model.backbone.params(), model.backbone.learnable_names(), sgd);
      sgd_update(model.cls_weight, vel_w, sgd);
      sgd_update(model.cls_bias, vel_b, sgd);
      loss_sum += static_cast<double>(loss) * bn;
    }

    const double monitor = train_accuracy(model, data, items, config.batch_size);
    if (history)
      history->push_back({epoch, epoch_lr,
                          loss_sum / static_cast<double>(items.size()), monitor});
    const auto decision = scheduler.observe(monitor);
    if (decision.stop) break;
    sgd.learning_rate = decision.lr;
  }
  return model;
}

double evaluate_closed(BaselineModel& model, const Dataset& data,
                       const DataSplit& split) {
  std::int64_t correct = 0, total = 0;
  for (int cls = 0; cls < data.num_classes(); ++cls) {
    const auto& idx = split.test_indices[static_cast<std::size_t>(cls)];
    if (idx.empty()) continue;
    std::vector<const NormalizedImage*> imgs;
    for (int i : idx)
      imgs.push_back(&data.samples[static_cast<std::size_t>(cls)]
                                  [static_cast<std::size_t>(i)]);
    const Tensor feats =
        model.backbone.embed(images_to_tensor(imgs), Mode::kInfer);
    const Tensor logits = dense_forward(feats, model.cls_weight, model.cls_bias);
    for (std::size_t q = 0; q < imgs.size(); ++q) {
      const float* row =
          logits.data.data() + q * static_cast<std::size_t>(model.num_classes);
      correct += argmax_row(row, model.num_classes) == cls ? 1 : 0;
      ++total;
    }
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

double evaluate_closed_template(SiameseModel& model, const Dataset& data,
                                const DataSplit& split) {
  return matcher_accuracy(model, data, data.class_ids(), data.class_ids(),
                          split.test_indices);
}

}  // namespace siamzero
