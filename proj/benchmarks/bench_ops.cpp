#include <benchmark/benchmark.h>

#include "siamzero/matcher.hpp"
#include "siamzero/model.hpp"
#include "siamzero/ops.hpp"
#include "siamzero/prep.hpp"
#include "siamzero/toygen.hpp"

using namespace siamzero;

namespace {

Tensor random_tensor(std::vector<int> shape, std::uint64_t seed) {
  Rng rng(seed);
  return Tensor::uniform(std::move(shape), rng, -1.0f, 1.0f);
}

}  // namespace

static void BM_Conv2dForward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int hw = static_cast<int>(state.range(1));
  const Tensor x = random_tensor({1, c, hw, hw}, 1);
  const Tensor w = random_tensor({c, c, 3, 3}, 2);
  const Tensor b = random_tensor({c}, 3);
  for (auto _ : state) {
    Tensor y = conv2d_forward(x, w, b);
    benchmark::DoNotOptimize(y.data.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Conv2dForward)->Args({32, 32})->Args({64, 16})->Args({128, 4});

static void BM_Conv2dBackward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int hw = static_cast<int>(state.range(1));
  const Tensor x = random_tensor({1, c, hw, hw}, 1);
  const Tensor w = random_tensor({c, c, 3, 3}, 2);
  const Tensor dy = random_tensor({1, c, hw, hw}, 3);
  for (auto _ : state) {
    ConvGrads g = conv2d_backward(x, w, dy);
    benchmark::DoNotOptimize(g.dw.data.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Conv2dBackward)->Args({32, 32})->Args({64, 16})->Args({128, 4});

static void BM_Maxpool(benchmark::State& state) {
  const Tensor x = random_tensor({8, 32, 64, 64}, 4);
  for (auto _ : state) {
    PoolOut out = maxpool2_forward(x);
    benchmark::DoNotOptimize(out.y.data.data());
  }
}
BENCHMARK(BM_Maxpool);

static void BM_Batchnorm(benchmark::State& state) {
  const Tensor x = random_tensor({8, 32, 64, 64}, 5);
  BatchNormState bn = BatchNormState::init(32);
  for (auto _ : state) {
    Tensor y = batchnorm_forward(x, bn, /*train=*/true);
    benchmark::DoNotOptimize(y.data.data());
  }
}
BENCHMARK(BM_Batchnorm);

static void BM_EmbedForward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SiameseModel model(ArchitectureSpec::default_spec(), 6);
  const Tensor batch = [&] {
    Rng rng(7);
    Tensor t({n, 1, kNormSize, kNormSize});
    for (auto& v : t.data) v = rng.unit();
    return t;
  }();
  for (auto _ : state) {
    Tensor f = model.embed(batch, Mode::kInfer);
    benchmark::DoNotOptimize(f.data.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EmbedForward)->Arg(1)->Arg(8);

static void BM_TrainStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SiameseModel model(ArchitectureSpec::default_spec(), 8);
  Rng rng(9);
  PairBatch batch;
  batch.templates = Tensor({n, 1, kNormSize, kNormSize});
  batch.samples = Tensor({n, 1, kNormSize, kNormSize});
  for (auto& v : batch.templates.data) v = rng.unit();
  for (auto& v : batch.samples.data) v = rng.unit();
  for (int i = 0; i < n; ++i) batch.labels.push_back(i % 2);
  SgdState sgd;
  sgd.learning_rate = 1e-4f;
  for (auto _ : state) {
    const float loss = train_step(model, batch, sgd);
    benchmark::DoNotOptimize(loss);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TrainStep)->Arg(4)->Arg(16);

static void BM_ClassifyCached(benchmark::State& state) {
  SiameseModel model(ArchitectureSpec::default_spec(), 10);
  const auto specs = gen_charset(16, 11, 4);
  std::vector<NormalizedImage> templates;
  for (const auto& s : specs) templates.push_back(preprocess(render_template(s)));
  std::vector<std::pair<int, const NormalizedImage*>> refs;
  for (std::size_t i = 0; i < templates.size(); ++i)
    refs.emplace_back(static_cast<int>(i), &templates[i]);
  const TemplateMatrix matrix = build_template_matrix(model, refs);

  const NormalizedImage query = preprocess(render_sample(specs[3], 1));
  const Tensor f = model.embed(images_to_tensor({&query}), Mode::kInfer);
  for (auto _ : state) {
    Classification c =
        classify({f.data.data(), static_cast<std::size_t>(kEmbedDim)}, matrix,
                 model.head_weight(), model.head_bias());
    benchmark::DoNotOptimize(c.class_id);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ClassifyCached);

static void BM_Preprocess(benchmark::State& state) {
  const GrayImage raw = render_sample(gen_class(12, 4), 0);
  for (auto _ : state) {
    NormalizedImage n = preprocess(raw);
    benchmark::DoNotOptimize(n.pixels.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Preprocess);

BENCHMARK_MAIN();
