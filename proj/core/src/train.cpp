#include "siamzero/train.hpp"

#include <fstream>
#include <limits>

#include "siamzero/matcher.hpp"

namespace siamzero {

void TrainConfig::validate() const {
  require(batch_size >= 1, "batch_size must be >= 1");
  require(lr0 > 0.0f, "lr0 must be > 0");
  require(lr_decay > 0.0f && lr_decay < 1.0f, "lr_decay must be in (0, 1)");
  require(plateau_patience >= 1, "plateau_patience must be >= 1");
  require(momentum >= 0.0f && momentum < 1.0f, "momentum must be in [0, 1)");
  require(weight_decay >= 0.0f, "weight_decay must be >= 0");
  require(max_epochs >= 1, "max_epochs must be >= 1");
  require(negatives_per_cell >= 0, "n must be >= 0");
  require(train_frac > 0.0f && train_frac <= 1.0f, "train_frac must be in (0, 1]");
}

PlateauScheduler::PlateauScheduler(float lr0, float factor, int patience,
                                   int max_decays)
    : lr_(lr0), factor_(factor), patience_(patience), max_decays_(max_decays),
      best_(-std::numeric_limits<double>::infinity()) {}

PlateauScheduler::Decision PlateauScheduler::observe(double metric) {
  Decision d{lr_};
  if (metric > best_) {
    best_ = metric;
    stale_ = 0;
    return d;
  }
  if (++stale_ >= patience_) {
    if (decays_ >= max_decays_) {
      d.stop = true;
      return d;
    }
    lr_ *= factor_;
    ++decays_;
    stale_ = 0;
    d.lr = lr_;
    d.decayed = true;
  }
  return d;
}

double matcher_accuracy(SiameseModel& model, const Dataset& data,
                        const std::vector<int>& template_ids,
                        const std::vector<int>& query_classes,
                        const std::vector<std::vector<int>>& indices) {
  std::vector<std::pair<int, const NormalizedImage*>> templates;
  for (int id : template_ids)
    templates.emplace_back(id, &data.templates[static_cast<std::size_t>(id)]);
  const TemplateMatrix matrix = build_template_matrix(model, templates);
  const auto w = model.head_weight();
  const float b = model.head_bias();

  std::int64_t correct = 0, total = 0;
  for (int cls : query_classes) {
    const auto& idx = indices[static_cast<std::size_t>(cls)];
    if (idx.empty()) continue;
    std::vector<const NormalizedImage*> imgs;
    for (int i : idx)
      imgs.push_back(&data.samples[static_cast<std::size_t>(cls)]
                                  [static_cast<std::size_t>(i)]);
    const Tensor feats = model.embed(images_to_tensor(imgs), Mode::kInfer);
    for (std::size_t q = 0; q < imgs.size(); ++q) {
      const std::span<const float> f{
          feats.data.data() + q * kEmbedDim, static_cast<std::size_t>(kEmbedDim)};
      correct += classify(f, matrix, w, b).class_id == cls ? 1 : 0;
      ++total;
    }
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

TrainResult train(SiameseModel& model, const Dataset& data,
                  const DataSplit& split, const TrainConfig& config) {
  config.validate();
  const auto& seen = split.classes.seen;
  const auto& unseen = split.classes.unseen;
  require(!seen.empty(), "train: no seen classes");

  // Pair generation runs over positions in the seen-class list; records are
  // mapped back to global class ids at batch-assembly time.
  std::vector<int> seen_sizes;
  for (int cls : seen)
    seen_sizes.push_back(static_cast<int>(
        split.train_indices[static_cast<std::size_t>(cls)].size()));
  const PairList pairs = generate_pairs(seen_sizes, config.negatives_per_cell,
                                        mix_seed(config.seed, 0x9a17ULL));
  require(!pairs.records.empty(), "train: empty pair list");

  SgdState sgd;
  sgd.learning_rate = config.lr0;
  sgd.momentum = config.momentum;
  sgd.weight_decay = config.weight_decay;

  PlateauScheduler scheduler(config.lr0, config.lr_decay,
                             config.plateau_patience);

  const auto fetch = [&](const PairRecord& r)
      -> std::pair<const NormalizedImage*, const NormalizedImage*> {
    const int tpl_cls = seen[static_cast<std::size_t>(r.template_class)];
    const int smp_cls = seen[static_cast<std::size_t>(r.sample_class)];
    const int smp_idx = split.train_indices[static_cast<std::size_t>(smp_cls)]
                                           [static_cast<std::size_t>(r.sample_index)];
    return {&data.templates[static_cast<std::size_t>(tpl_cls)],
            &data.samples[static_cast<std::size_t>(smp_cls)]
                         [static_cast<std::size_t>(smp_idx)]};
  };

  TrainResult result;
  double best_monitor = -1.0;
  ParamMap best_params;
  const std::size_t kw = static_cast<std::size_t>(kNormSize) * kNormSize;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    const PairList order = reshuffle(pairs, epoch);
    const float epoch_lr = sgd.learning_rate;

    double loss_sum = 0.0;
    std::int64_t pair_count = 0;
    for (std::size_t start = 0; start < order.records.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          order.records.size(), start + static_cast<std::size_t>(config.batch_size));
      const int bn = static_cast<int>(end - start);
      PairBatch batch;
      batch.templates = Tensor({bn, 1, kNormSize, kNormSize});
      batch.samples = Tensor({bn, 1, kNormSize, kNormSize});
      batch.labels.resize(static_cast<std::size_t>(bn));
      for (int i = 0; i < bn; ++i) {
        const PairRecord& r = order.records[start + static_cast<std::size_t>(i)];
        const auto [tpl, smp] = fetch(r);
        std::copy(tpl->pixels.begin(), tpl->pixels.end(),
                  batch.templates.data.begin() + static_cast<std::size_t>(i) * kw);
        std::copy(smp->pixels.begin(), smp->pixels.end(),
                  batch.samples.data.begin() + static_cast<std::size_t>(i) * kw);
        batch.labels[static_cast<std::size_t>(i)] = r.label;
      }
      const float loss = train_step(model, batch, sgd);
      if (result.first_step_losses.size() < 10)
        result.first_step_losses.push_back(loss);
      loss_sum += static_cast<double>(loss) * bn;
      pair_count += bn;
    }

    // Validation criterion: unseen-class recognition on the unseen train
    // samples (template matrix over the unseen classes only); closed-set
    // runs monitor the seen train samples instead.
    const auto& monitor_ids = unseen.empty() ? seen : unseen;
    const double monitor_acc = matcher_accuracy(model, data, monitor_ids,
                                                monitor_ids, split.train_indices);

    result.history.push_back(
        {epoch, epoch_lr, loss_sum / static_cast<double>(pair_count), monitor_acc});

    // the returned checkpoint is the best-validation epoch, not the last one
    if (monitor_acc > best_monitor) {
      best_monitor = monitor_acc;
      best_params = model.params();
    }

    const auto decision = scheduler.observe(monitor_acc);
    if (decision.stop) break;
    sgd.learning_rate = decision.lr;
  }
  if (!best_params.empty()) model.params() = std::move(best_params);
  return result;
}

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(path + ": cannot open for writing");
  out << "epoch,lr,train_loss,monitor_acc\n";
  for (const auto& e : history)
    out << e.epoch << ',' << e.lr << ',' << e.train_loss << ',' << e.monitor_acc
        << '\n';
  out.flush();
  if (!out) fail(path + ": write failed");
}

}  // namespace siamzero
