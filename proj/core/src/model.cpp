#include "siamzero/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace siamzero {

namespace {

std::string block_name(const char* prefix, int i) {
  return std::string(prefix) + std::to_string(i + 1);
}

}  // namespace

Tensor images_to_tensor(const std::vector<const NormalizedImage*>& images) {
  require(!images.empty(), "images_to_tensor: empty batch");
  Tensor t({static_cast<int>(images.size()), 1, kNormSize, kNormSize});
  const std::size_t stride = static_cast<std::size_t>(kNormSize) * kNormSize;
  for (std::size_t i = 0; i < images.size(); ++i)
    std::memcpy(t.data.data() + i * stride, images[i]->pixels.data(),
                stride * sizeof(float));
  return t;
}

std::vector<std::pair<std::string, std::vector<int>>> SiameseModel::param_shapes(
    const ArchitectureSpec& spec) {
  spec.validate();
  std::vector<std::pair<std::string, std::vector<int>>> shapes;
  int in_ch = 1;
  for (std::size_t i = 0; i < spec.convs.size(); ++i) {
    const auto& c = spec.convs[i];
    const int idx = static_cast<int>(i);
    shapes.emplace_back(block_name("conv", idx) + ".weight",
                        std::vector<int>{c.out_channels, in_ch, c.kernel, c.kernel});
    shapes.emplace_back(block_name("conv", idx) + ".bias",
                        std::vector<int>{c.out_channels});
    for (const char* s : {".gamma", ".beta", ".running_mean", ".running_var"})
      shapes.emplace_back(block_name("bn", idx) + s,
                          std::vector<int>{c.out_channels});
    in_ch = c.out_channels;
  }
  shapes.emplace_back("fc.weight", std::vector<int>{kEmbedDim, spec.flat_dim()});
  shapes.emplace_back("fc.bias", std::vector<int>{kEmbedDim});
  shapes.emplace_back("head.weight", std::vector<int>{kEmbedDim});
  shapes.emplace_back("head.bias", std::vector<int>{1});
  return shapes;
}

ParamMap SiameseModel::init_params(const ArchitectureSpec& spec,
                                   std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  ParamMap p;
  int in_ch = 1;
  for (std::size_t i = 0; i < spec.convs.size(); ++i) {
    const auto& c = spec.convs[i];
    const int idx = static_cast<int>(i);
    const float bound = std::sqrt(
        6.0f / static_cast<float>(in_ch * c.kernel * c.kernel));
    p[block_name("conv", idx) + ".weight"] = Tensor::uniform(
        {c.out_channels, in_ch, c.kernel, c.kernel}, rng, -bound, bound);
    p[block_name("conv", idx) + ".bias"] = Tensor({c.out_channels});
    p[block_name("bn", idx) + ".gamma"] = Tensor::full({c.out_channels}, 1.0f);
    p[block_name("bn", idx) + ".beta"] = Tensor({c.out_channels});
    p[block_name("bn", idx) + ".running_mean"] = Tensor({c.out_channels});
    p[block_name("bn", idx) + ".running_var"] =
        Tensor::full({c.out_channels}, 1.0f);
    in_ch = c.out_channels;
  }
  const float fc_bound = std::sqrt(6.0f / static_cast<float>(spec.flat_dim()));
  p["fc.weight"] =
      Tensor::uniform({kEmbedDim, spec.flat_dim()}, rng, -fc_bound, fc_bound);
  p["fc.bias"] = Tensor({kEmbedDim});
  p["head.weight"] = Tensor({kEmbedDim});
  p["head.bias"] = Tensor({1});
  return p;
}

SiameseModel::SiameseModel(ArchitectureSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), params_(init_params(spec_, seed)) {
  for (const auto& [name, shape] : param_shapes(spec_)) {
    (void)shape;
    if (name.find("running_") == std::string::npos) learnable_.push_back(name);
  }
}

SiameseModel::SiameseModel(ArchitectureSpec spec, ParamMap params)
    : spec_(std::move(spec)), params_(std::move(params)) {
  const auto expected = param_shapes(spec_);
  for (const auto& [name, shape] : expected) {
    auto it = params_.find(name);
    if (it == params_.end()) fail("checkpoint: missing parameter '" + name + "'");
    if (it->second.shape != shape)
      fail("checkpoint: shape mismatch for '" + name + "', expected " +
           shape_to_string(shape) + " got " + shape_to_string(it->second.shape));
    if (name.find("running_") == std::string::npos) learnable_.push_back(name);
  }
  if (params_.size() != expected.size()) {
    for (const auto& [name, t] : params_) {
      (void)t;
      bool known = false;
      for (const auto& [ename, eshape] : expected) {
        (void)eshape;
        if (ename == name) known = true;
      }
      if (!known) fail("checkpoint: unexpected parameter '" + name + "'");
    }
  }
}

void SiameseModel::ensure_grads() {
  for (const auto& name : learnable_) params_[name].ensure_grad();
}

void SiameseModel::zero_grads() {
  for (const auto& name : learnable_) params_[name].zero_grad();
}

std::span<const float> SiameseModel::head_weight() const {
  const auto& w = params_.at("head.weight");
  return {w.data.data(), w.data.size()};
}

float SiameseModel::head_bias() const {
  return params_.at("head.bias").data[0];
}

Tensor SiameseModel::embed(const Tensor& batch, Mode mode, EmbedTrace* trace) {
  require(batch.rank() == 4 && batch.dim(1) == 1 && batch.dim(2) == kNormSize &&
              batch.dim(3) == kNormSize,
          "embed: input must be (N, 1, 64, 64), got " +
              shape_to_string(batch.shape));
  const bool train = mode == Mode::kTrain;
  if (trace) trace->blocks.assign(spec_.convs.size(), {});

  Tensor x = batch;
  for (std::size_t i = 0; i < spec_.convs.size(); ++i) {
    const auto& blk = spec_.convs[i];
    const int idx = static_cast<int>(i);
    EmbedTrace::Block* tb = trace ? &trace->blocks[i] : nullptr;

    if (tb) tb->input = x;
    Tensor y = conv2d_forward(x, params_.at(block_name("conv", idx) + ".weight"),
                              params_.at(block_name("conv", idx) + ".bias"));
    y = batchnorm_forward(y, params_.at(block_name("bn", idx) + ".gamma"),
                          params_.at(block_name("bn", idx) + ".beta"),
                          params_[block_name("bn", idx) + ".running_mean"],
                          params_[block_name("bn", idx) + ".running_var"],
                          0.1f, 1e-5f, train, tb ? &tb->bn : nullptr);
    y = relu(y);
    if (tb) tb->post_relu = y;
    if (blk.pool_after) {
      if (tb) tb->pre_pool_shape = y.shape;
      PoolOut p = maxpool2_forward(y);
      if (tb) tb->pool_argmax = std::move(p.argmax);
      y = std::move(p.y);
    }
    x = std::move(y);
  }

  // flatten (N, C, s, s) -> (N, C*s*s); row-major layout already matches
  Tensor flat({x.dim(0), spec_.flat_dim()});
  flat.data = x.data;
  if (trace) trace->flat = flat;

  Tensor emb = dense_forward(flat, params_.at("fc.weight"), params_.at("fc.bias"));
  if (spec_.relu_on_embedding) {
    emb = relu(emb);
    if (trace) trace->embedding = emb;
  }
  return emb;
}

void SiameseModel::embed_backward(const EmbedTrace& trace, const Tensor& dfeat) {
  ensure_grads();
  Tensor d = dfeat;
  if (spec_.relu_on_embedding) d = relu_backward(d, trace.embedding);

  DenseGrads dg = dense_backward(trace.flat, params_.at("fc.weight"), d);
  auto accumulate = [&](const std::string& name, const Tensor& g) {
    Tensor& p = params_[name];
    p.ensure_grad();
    require(g.data.size() == p.grad.size(),
            "embed_backward: gradient size mismatch for " + name);
    for (std::size_t i = 0; i < g.data.size(); ++i) p.grad[i] += g.data[i];
  };
  accumulate("fc.weight", dg.dw);
  accumulate("fc.bias", dg.db);

  // un-flatten
  const auto& last = trace.blocks.back();
  Tensor dx = [&] {
    std::vector<int> shape;
    if (spec_.convs.back().pool_after) {
      shape = last.pre_pool_shape;
      shape[2] /= 2;
      shape[3] /= 2;
    } else {
      shape = last.post_relu.shape;
    }
    Tensor t(shape);
    t.data = dg.dx.data;
    return t;
  }();

  for (int i = static_cast<int>(spec_.convs.size()) - 1; i >= 0; --i) {
    const auto& blk = spec_.convs[static_cast<std::size_t>(i)];
    const auto& tb = trace.blocks[static_cast<std::size_t>(i)];
    if (blk.pool_after)
      dx = maxpool2_backward(dx, tb.pool_argmax, tb.pre_pool_shape);
    dx = relu_backward(dx, tb.post_relu);
    BnGrads bg = batchnorm_backward(dx, tb.bn,
                                    params_.at(block_name("bn", i) + ".gamma"));
    accumulate(block_name("bn", i) + ".gamma", bg.dgamma);
    accumulate(block_name("bn", i) + ".beta", bg.dbeta);
    ConvGrads cg = conv2d_backward(
        tb.input, params_.at(block_name("conv", i) + ".weight"), bg.dx);
    accumulate(block_name("conv", i) + ".weight", cg.dw);
    accumulate(block_name("conv", i) + ".bias", cg.db);
    dx = std::move(cg.dx);
  }
}

float similarity_logit(std::span<const float> f1, std::span<const float> f2,
                       std::span<const float> w, float b) {
  require(f1.size() == static_cast<std::size_t>(kEmbedDim) &&
              f2.size() == f1.size() && w.size() == f1.size(),
          "similarity: feature vectors must have dimension 128");
  double z = b;
  for (std::size_t k = 0; k < f1.size(); ++k)
    z += static_cast<double>(w[k]) * std::fabs(f1[k] - f2[k]);
  return static_cast<float>(z);
}

float similarity(std::span<const float> f1, std::span<const float> f2,
                 std::span<const float> w, float b) {
  const float p = sigmoid_scalar(similarity_logit(f1, f2, w, b));
  return std::clamp(p, kProbClamp, 1.0f - kProbClamp);
}

namespace {

struct PairForward {
  Tensor feats;       // (2N, 128): templates first, then samples
  std::vector<float> probs;
  std::vector<float> logits;
  double loss = 0.0;
};

PairForward pair_forward(SiameseModel& model, const PairBatch& batch, Mode mode,
                         EmbedTrace* trace) {
  const int n = batch.size();
  require(n > 0, "pair batch must be non-empty");
  require(batch.templates.dim(0) == n && batch.samples.dim(0) == n,
          "pair batch: image/label count mismatch");

  // Both branches share one parameter set; a single concatenated batch
  // (templates then samples) makes that structural.
  Tensor x({2 * n, 1, kNormSize, kNormSize});
  std::copy(batch.templates.data.begin(), batch.templates.data.end(),
            x.data.begin());
  std::copy(batch.samples.data.begin(), batch.samples.data.end(),
            x.data.begin() + batch.templates.data.size());

  PairForward f;
  f.feats = model.embed(x, mode, trace);

  const auto w = model.head_weight();
  const float b = model.head_bias();
  f.probs.resize(static_cast<std::size_t>(n));
  f.logits.resize(static_cast<std::size_t>(n));
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const float* ft = f.feats.data.data() + static_cast<std::size_t>(i) * kEmbedDim;
    const float* fs =
        f.feats.data.data() + static_cast<std::size_t>(n + i) * kEmbedDim;
    const float z = similarity_logit({ft, static_cast<std::size_t>(kEmbedDim)},
                                     {fs, static_cast<std::size_t>(kEmbedDim)}, w, b);
    f.logits[static_cast<std::size_t>(i)] = z;
    f.probs[static_cast<std::size_t>(i)] = sigmoid_scalar(z);
    loss += bce_with_logit(z, batch.labels[static_cast<std::size_t>(i)]);
  }
  f.loss = loss / n;
  return f;
}

}  // namespace

float pair_loss_forward(SiameseModel& model, const PairBatch& batch, Mode mode) {
  return static_cast<float>(pair_forward(model, batch, mode, nullptr).loss);
}

float pair_loss_forward_backward(SiameseModel& model, const PairBatch& batch) {
  const int n = batch.size();
  EmbedTrace trace;
  PairForward f = pair_forward(model, batch, Mode::kTrain, &trace);

  const auto w = model.head_weight();
  Tensor dfeat({2 * n, kEmbedDim});
  Tensor& head_w = model.params()["head.weight"];
  Tensor& head_b = model.params()["head.bias"];
  head_w.ensure_grad();
  head_b.ensure_grad();

  for (int i = 0; i < n; ++i) {
    // d(mean BCE)/dz for sigmoid+BCE collapses to (p - y) / N
    const float dz = (f.probs[static_cast<std::size_t>(i)] -
                      static_cast<float>(batch.labels[static_cast<std::size_t>(i)])) /
                     static_cast<float>(n);
    const float* ft = f.feats.data.data() + static_cast<std::size_t>(i) * kEmbedDim;
    const float* fs =
        f.feats.data.data() + static_cast<std::size_t>(n + i) * kEmbedDim;
    float* dft = dfeat.data.data() + static_cast<std::size_t>(i) * kEmbedDim;
    float* dfs = dfeat.data.data() + static_cast<std::size_t>(n + i) * kEmbedDim;
    for (int k = 0; k < kEmbedDim; ++k) {
      const float diff = ft[k] - fs[k];
      head_w.grad[static_cast<std::size_t>(k)] += dz * std::fabs(diff);
      const float sign = diff > 0.0f ? 1.0f : (diff < 0.0f ? -1.0f : 0.0f);
      const float g = dz * w[static_cast<std::size_t>(k)] * sign;
      dft[k] = g;
      dfs[k] = -g;
    }
    head_b.grad[0] += dz;
  }

  model.embed_backward(trace, dfeat);
  return static_cast<float>(f.loss);
}

float train_step(SiameseModel& model, const PairBatch& batch, SgdState& sgd) {
  model.ensure_grads();
  model.zero_grads();
  const float loss = pair_loss_forward_backward(model, batch);
  sgd_step(model.params(), model.learnable_names(), sgd);
  return loss;
}

double pair_accuracy(SiameseModel& model, const PairBatch& batch) {
  PairForward f = pair_forward(model, batch, Mode::kInfer, nullptr);
  int correct = 0;
  for (int i = 0; i < batch.size(); ++i) {
    const int pred = f.probs[static_cast<std::size_t>(i)] >= 0.5f ? 1 : 0;
    if (pred == batch.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / batch.size();
}

}  // namespace siamzero
