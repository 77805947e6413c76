#pragma once

#include <span>
#include <string>
#include <vector>

#include "siamzero/arch.hpp"
#include "siamzero/ops.hpp"
#include "siamzero/prep.hpp"
#include "siamzero/sgd.hpp"

namespace siamzero {

/// Batch-norm statistics source; always passed explicitly, never global state.
enum class Mode { kTrain, kInfer };

/// Per-layer forward caches kept for the backward pass.
struct EmbedTrace {
  struct Block {
    Tensor input;       // conv input activations
    BnCache bn;
    Tensor post_relu;   // pre-pool
    std::vector<std::int32_t> pool_argmax;
    std::vector<int> pre_pool_shape;
  };
  std::vector<Block> blocks;
  Tensor flat;       // dense input (N, flat_dim)
  Tensor embedding;  // (N, 128), kept when relu_on_embedding
};

/// A batch of (template image, sample image, same/different label) pairs.
struct PairBatch {
  Tensor templates;         // (N, 1, 64, 64)
  Tensor samples;           // (N, 1, 64, 64)
  std::vector<int> labels;  // y in {0, 1}

  int size() const { return static_cast<int>(labels.size()); }
};

Tensor images_to_tensor(const std::vector<const NormalizedImage*>& images);

/// The twin embedding network plus the similarity head. Both branches are
/// this one parameter set; "branch" is purely a dataflow notion.
class SiameseModel {
 public:
  /// Fresh deterministic initialization: He-style fan-in uniform bounds for
  /// conv/dense, gamma=1, beta=0, head w=0 b=0 (every pair starts at p=0.5).
  SiameseModel(ArchitectureSpec spec, std::uint64_t seed);

  /// Adopts an existing parameter set, validated against the architecture.
  SiameseModel(ArchitectureSpec spec, ParamMap params);

  const ArchitectureSpec& spec() const { return spec_; }
  ParamMap& params() { return params_; }
  const ParamMap& params() const { return params_; }
  const std::vector<std::string>& learnable_names() const { return learnable_; }

  /// (N, 1, 64, 64) -> (N, 128). Pass a trace to enable embed_backward.
  Tensor embed(const Tensor& batch, Mode mode, EmbedTrace* trace = nullptr);

  /// Accumulates parameter gradients from d(loss)/d(embedding).
  void embed_backward(const EmbedTrace& trace, const Tensor& dfeat);

  std::span<const float> head_weight() const;
  float head_bias() const;

  void ensure_grads();
  void zero_grads();

  static ParamMap init_params(const ArchitectureSpec& spec, std::uint64_t seed);
  /// Expected tensor names and shapes for checkpoint validation.
  static std::vector<std::pair<std::string, std::vector<int>>> param_shapes(
      const ArchitectureSpec& spec);

 private:
  ArchitectureSpec spec_;
  ParamMap params_;
  std::vector<std::string> learnable_;
};

/// p = sigma(sum_k w_k |f1_k - f2_k| + b), clamped to (1e-7, 1-1e-7).
/// Symmetric in (f1, f2).
float similarity(std::span<const float> f1, std::span<const float> f2,
                 std::span<const float> w, float b);

/// Pre-sigmoid score; ranking by it equals ranking by the probability.
float similarity_logit(std::span<const float> f1, std::span<const float> f2,
                       std::span<const float> w, float b);

/// Forward both pair sides through the shared embedder (one concatenated
/// batch), mean BCE over the batch, full backward into parameter grads.
/// Returns the loss. Grads accumulate; call model.zero_grads() first.
float pair_loss_forward_backward(SiameseModel& model, const PairBatch& batch);

/// Loss only, no gradients. Train mode uses batch statistics.
float pair_loss_forward(SiameseModel& model, const PairBatch& batch, Mode mode);

/// zero grads -> forward/backward -> one SGD step. Returns the batch loss.
float train_step(SiameseModel& model, const PairBatch& batch, SgdState& sgd);

/// Fraction of pairs classified correctly at the p >= 0.5 threshold
/// (infer mode).
double pair_accuracy(SiameseModel& model, const PairBatch& batch);

}  // namespace siamzero
