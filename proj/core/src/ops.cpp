#include "siamzero/ops.hpp"

#include <algorithm>
#include <cmath>

namespace siamzero {

namespace {

void check_conv_shapes(const Tensor& x, const Tensor& w, const Tensor* b) {
  require(x.rank() == 4, "conv2d: input must be (N, C, H, W), got " +
                             shape_to_string(x.shape));
  require(w.rank() == 4, "conv2d: kernel must be (O, I, kh, kw), got " +
                             shape_to_string(w.shape));
  require(w.dim(2) == w.dim(3) && w.dim(2) % 2 == 1,
          "conv2d: kernel must be square and odd-sized, got " +
              shape_to_string(w.shape));
  require(x.dim(1) == w.dim(1),
          "conv2d: channel mismatch, input " + shape_to_string(x.shape) +
              " vs kernel " + shape_to_string(w.shape));
  if (b)
    require(b->rank() == 1 && b->dim(0) == w.dim(0),
            "conv2d: bias must be (O), got " + shape_to_string(b->shape));
}

/// Fills col (Ci*k*k rows, H*W cols) with zero padding k/2.
void im2col(const float* x, int ci, int h, int w, int k, float* col) {
  const int pad = k / 2;
  const int hw = h * w;
  for (int c = 0; c < ci; ++c) {
    const float* xc = x + static_cast<std::size_t>(c) * hw;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        float* row = col + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * hw;
        const int sy0 = ky - pad;
        const int sx0 = kx - pad;
        for (int oy = 0; oy < h; ++oy) {
          const int sy = oy + sy0;
          float* dst = row + static_cast<std::size_t>(oy) * w;
          if (sy < 0 || sy >= h) {
            std::fill(dst, dst + w, 0.0f);
            continue;
          }
          const float* src = xc + static_cast<std::size_t>(sy) * w;
          // valid x range: 0 <= ox + sx0 < w
          const int ox_lo = std::max(0, -sx0);
          const int ox_hi = std::min(w, w - sx0);
          for (int ox = 0; ox < ox_lo; ++ox) dst[ox] = 0.0f;
          for (int ox = ox_lo; ox < ox_hi; ++ox) dst[ox] = src[ox + sx0];
          for (int ox = ox_hi; ox < w; ++ox) dst[ox] = 0.0f;
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
  check_conv_shapes(x, w, &b);
  const int n = x.dim(0), ci = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const int co = w.dim(0), k = w.dim(2);
  const int hw = h * wd;
  const int kk = ci * k * k;

  Tensor y({n, co, h, wd});
  std::vector<float> col(static_cast<std::size_t>(kk) * hw);
  std::vector<double> acc(static_cast<std::size_t>(hw));

  for (int img = 0; img < n; ++img) {
    im2col(x.data.data() + static_cast<std::size_t>(img) * ci * hw, ci, h, wd, k,
           col.data());
    float* yo = y.data.data() + static_cast<std::size_t>(img) * co * hw;
    for (int o = 0; o < co; ++o) {
      const double bias = b.data[static_cast<std::size_t>(o)];
      for (int j = 0; j < hw; ++j) acc[static_cast<std::size_t>(j)] = bias;
      const float* wo = w.data.data() + static_cast<std::size_t>(o) * kk;
      for (int kc = 0; kc < kk; ++kc) {
        const double wv = wo[kc];
        const float* row = col.data() + static_cast<std::size_t>(kc) * hw;
        double* a = acc.data();
        for (int j = 0; j < hw; ++j) a[j] += wv * static_cast<double>(row[j]);
      }
      float* dst = yo + static_cast<std::size_t>(o) * hw;
      for (int j = 0; j < hw; ++j)
        dst[j] = static_cast<float>(acc[static_cast<std::size_t>(j)]);
    }
  }
  return y;
}

ConvGrads conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& dy) {
  check_conv_shapes(x, w, nullptr);
  const int n = x.dim(0), ci = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const int co = w.dim(0), k = w.dim(2);
  require(dy.shape == std::vector<int>({n, co, h, wd}),
          "conv2d_backward: upstream gradient shape " +
              shape_to_string(dy.shape) + " does not match output");
  const int hw = h * wd;
  const int kk = ci * k * k;
  const int pad = k / 2;

  ConvGrads g{Tensor(x.shape), Tensor(w.shape), Tensor({co})};

  std::vector<float> col(static_cast<std::size_t>(kk) * hw);
  std::vector<double> dw_acc(static_cast<std::size_t>(co) * kk, 0.0);
  std::vector<double> db_acc(static_cast<std::size_t>(co), 0.0);
  std::vector<double> drow(static_cast<std::size_t>(hw));

  for (int img = 0; img < n; ++img) {
    const float* xin = x.data.data() + static_cast<std::size_t>(img) * ci * hw;
    const float* dyo = dy.data.data() + static_cast<std::size_t>(img) * co * hw;
    float* dxo = g.dx.data.data() + static_cast<std::size_t>(img) * ci * hw;

    im2col(xin, ci, h, wd, k, col.data());

    // db and dw
    for (int o = 0; o < co; ++o) {
      const float* dyr = dyo + static_cast<std::size_t>(o) * hw;
      double s = 0.0;
      for (int j = 0; j < hw; ++j) s += static_cast<double>(dyr[j]);
      db_acc[static_cast<std::size_t>(o)] += s;

      double* dwr = dw_acc.data() + static_cast<std::size_t>(o) * kk;
      for (int kc = 0; kc < kk; ++kc) {
        const float* row = col.data() + static_cast<std::size_t>(kc) * hw;
        // four independent partial sums so the reduction vectorizes
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        int j = 0;
        for (; j + 4 <= hw; j += 4) {
          s0 += static_cast<double>(dyr[j]) * static_cast<double>(row[j]);
          s1 += static_cast<double>(dyr[j + 1]) * static_cast<double>(row[j + 1]);
          s2 += static_cast<double>(dyr[j + 2]) * static_cast<double>(row[j + 2]);
          s3 += static_cast<double>(dyr[j + 3]) * static_cast<double>(row[j + 3]);
        }
        double acc = (s0 + s1) + (s2 + s3);
        for (; j < hw; ++j)
          acc += static_cast<double>(dyr[j]) * static_cast<double>(row[j]);
        dwr[kc] += acc;
      }
    }

    // dx via dcol = W^T * dy, accumulated straight into dx (col2im)
    for (int kc = 0; kc < kk; ++kc) {
      double* a = drow.data();
      for (int j = 0; j < hw; ++j) a[j] = 0.0;
      for (int o = 0; o < co; ++o) {
        const double wv = w.data[static_cast<std::size_t>(o) * kk + kc];
        const float* dyr = dyo + static_cast<std::size_t>(o) * hw;
        for (int j = 0; j < hw; ++j) a[j] += wv * static_cast<double>(dyr[j]);
      }
      const int c = kc / (k * k);
      const int ky = (kc / k) % k;
      const int kx = kc % k;
      const int sy0 = ky - pad, sx0 = kx - pad;
      float* dxc = dxo + static_cast<std::size_t>(c) * hw;
      for (int oy = 0; oy < h; ++oy) {
        const int sy = oy + sy0;
        if (sy < 0 || sy >= h) continue;
        const int ox_lo = std::max(0, -sx0);
        const int ox_hi = std::min(wd, wd - sx0);
        float* dst = dxc + static_cast<std::size_t>(sy) * wd;
        const double* src = a + static_cast<std::size_t>(oy) * wd;
        for (int ox = ox_lo; ox < ox_hi; ++ox)
          dst[ox + sx0] += static_cast<float>(src[ox]);
      }
    }
  }

  for (std::size_t i = 0; i < g.dw.data.size(); ++i)
    g.dw.data[i] = static_cast<float>(dw_acc[i]);
  for (int o = 0; o < co; ++o)
    g.db.data[static_cast<std::size_t>(o)] =
        static_cast<float>(db_acc[static_cast<std::size_t>(o)]);
  return g;
}

PoolOut maxpool2_forward(const Tensor& x) {
  require(x.rank() == 4, "maxpool2: input must be (N, C, H, W)");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  require(h % 2 == 0 && w % 2 == 0,
          "maxpool2: spatial dims must be even, got " + shape_to_string(x.shape));
  const int oh = h / 2, ow = w / 2;

  PoolOut out{Tensor({n, c, oh, ow}), {}};
  out.argmax.resize(out.y.data.size());

  for (int nc = 0; nc < n * c; ++nc) {
    const float* src = x.data.data() + static_cast<std::size_t>(nc) * h * w;
    float* dst = out.y.data.data() + static_cast<std::size_t>(nc) * oh * ow;
    std::int32_t* am = out.argmax.data() + static_cast<std::size_t>(nc) * oh * ow;
    const std::int32_t base = nc * h * w;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const int iy = oy * 2, ix = ox * 2;
        float best = src[iy * w + ix];
        int best_idx = iy * w + ix;
        // row-major window scan; strict > keeps the first max on ties
        const int cand[3] = {iy * w + ix + 1, (iy + 1) * w + ix,
                             (iy + 1) * w + ix + 1};
        for (int t = 0; t < 3; ++t) {
          if (src[cand[t]] > best) {
            best = src[cand[t]];
            best_idx = cand[t];
          }
        }
        dst[oy * ow + ox] = best;
        am[oy * ow + ox] = base + best_idx;
      }
    }
  }
  return out;
}

Tensor maxpool2_backward(const Tensor& dy, const std::vector<std::int32_t>& argmax,
                         const std::vector<int>& input_shape) {
  Tensor dx(input_shape);
  require(argmax.size() == dy.data.size(),
          "maxpool2_backward: argmax/gradient size mismatch");
  for (std::size_t i = 0; i < dy.data.size(); ++i)
    dx.data[static_cast<std::size_t>(argmax[i])] += dy.data[i];
  return dx;
}

BatchNormState BatchNormState::init(int channels) {
  BatchNormState s;
  s.gamma = Tensor::full({channels}, 1.0f);
  s.beta = Tensor({channels});
  s.running_mean = Tensor({channels});
  s.running_var = Tensor::full({channels}, 1.0f);
  return s;
}

Tensor batchnorm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         Tensor& running_mean, Tensor& running_var,
                         float momentum, float eps, bool train, BnCache* cache) {
  require(x.rank() == 4, "batchnorm: input must be (N, C, H, W)");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  require(gamma.numel() == c && beta.numel() == c && running_mean.numel() == c &&
              running_var.numel() == c,
          "batchnorm: per-channel parameter size mismatch");
  require(eps > 0.0f, "batchnorm: eps must be > 0");
  if (train)
    require(n >= 2, "batchnorm: train mode requires batch size >= 2, got " +
                        std::to_string(n));

  const int hw = h * w;
  const std::int64_t per_channel = static_cast<std::int64_t>(n) * hw;

  Tensor y(x.shape);
  if (cache) {
    cache->xhat = Tensor(x.shape);
    cache->invstd.assign(static_cast<std::size_t>(c), 0.0f);
    cache->train = train;
  }

  for (int ch = 0; ch < c; ++ch) {
    float mean, var;
    if (train) {
      double sum = 0.0, sq = 0.0;
      for (int img = 0; img < n; ++img) {
        const float* src =
            x.data.data() + (static_cast<std::size_t>(img) * c + ch) * hw;
        for (int j = 0; j < hw; ++j) {
          const double v = src[j];
          sum += v;
          sq += v * v;
        }
      }
      const double m = sum / static_cast<double>(per_channel);
      const double v = std::max(0.0, sq / static_cast<double>(per_channel) - m * m);
      mean = static_cast<float>(m);
      var = static_cast<float>(v);
      running_mean.data[static_cast<std::size_t>(ch)] =
          (1.0f - momentum) * running_mean.data[static_cast<std::size_t>(ch)] +
          momentum * mean;
      running_var.data[static_cast<std::size_t>(ch)] =
          (1.0f - momentum) * running_var.data[static_cast<std::size_t>(ch)] +
          momentum * var;
    } else {
      mean = running_mean.data[static_cast<std::size_t>(ch)];
      var = running_var.data[static_cast<std::size_t>(ch)];
    }
    const float invstd = 1.0f / std::sqrt(var + eps);
    const float g = gamma.data[static_cast<std::size_t>(ch)];
    const float bt = beta.data[static_cast<std::size_t>(ch)];
    if (cache) cache->invstd[static_cast<std::size_t>(ch)] = invstd;

    for (int img = 0; img < n; ++img) {
      const std::size_t off = (static_cast<std::size_t>(img) * c + ch) * hw;
      const float* src = x.data.data() + off;
      float* dst = y.data.data() + off;
      float* xh = cache ? cache->xhat.data.data() + off : nullptr;
      for (int j = 0; j < hw; ++j) {
        const float xhat = (src[j] - mean) * invstd;
        if (xh) xh[j] = xhat;
        dst[j] = g * xhat + bt;
      }
    }
  }
  return y;
}

BnGrads batchnorm_backward(const Tensor& dy, const BnCache& cache,
                           const Tensor& gamma) {
  require(cache.train, "batchnorm_backward: cache must come from train mode");
  require(dy.shape == cache.xhat.shape,
          "batchnorm_backward: gradient shape mismatch");
  const int n = dy.dim(0), c = dy.dim(1), h = dy.dim(2), w = dy.dim(3);
  const int hw = h * w;
  const double count = static_cast<double>(n) * hw;

  BnGrads g{Tensor(dy.shape), Tensor({c}), Tensor({c})};

  for (int ch = 0; ch < c; ++ch) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int img = 0; img < n; ++img) {
      const std::size_t off = (static_cast<std::size_t>(img) * c + ch) * hw;
      const float* d = dy.data.data() + off;
      const float* xh = cache.xhat.data.data() + off;
      for (int j = 0; j < hw; ++j) {
        sum_dy += d[j];
        sum_dy_xhat += static_cast<double>(d[j]) * xh[j];
      }
    }
    g.dbeta.data[static_cast<std::size_t>(ch)] = static_cast<float>(sum_dy);
    g.dgamma.data[static_cast<std::size_t>(ch)] = static_cast<float>(sum_dy_xhat);

    const double gam = gamma.data[static_cast<std::size_t>(ch)];
    const double invstd = cache.invstd[static_cast<std::size_t>(ch)];
    const double mean_dy = sum_dy / count;
    const double mean_dy_xhat = sum_dy_xhat / count;
    for (int img = 0; img < n; ++img) {
      const std::size_t off = (static_cast<std::size_t>(img) * c + ch) * hw;
      const float* d = dy.data.data() + off;
      const float* xh = cache.xhat.data.data() + off;
      float* dst = g.dx.data.data() + off;
      for (int j = 0; j < hw; ++j) {
        dst[j] = static_cast<float>(
            gam * invstd *
            (static_cast<double>(d[j]) - mean_dy - xh[j] * mean_dy_xhat));
      }
    }
  }
  return g;
}

Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
  require(x.rank() == 2 && w.rank() == 2 && b.rank() == 1,
          "dense: x must be (N, I), w (O, I), b (O)");
  const int n = x.dim(0), in = x.dim(1), out = w.dim(0);
  require(w.dim(1) == in && b.dim(0) == out,
          "dense: shape mismatch, x " + shape_to_string(x.shape) + " w " +
              shape_to_string(w.shape));

  Tensor y({n, out});
  for (int r = 0; r < n; ++r) {
    const float* xr = x.data.data() + static_cast<std::size_t>(r) * in;
    float* yr = y.data.data() + static_cast<std::size_t>(r) * out;
    for (int o = 0; o < out; ++o) {
      const float* wo = w.data.data() + static_cast<std::size_t>(o) * in;
      double acc = b.data[static_cast<std::size_t>(o)];
      for (int i = 0; i < in; ++i)
        acc += static_cast<double>(xr[i]) * static_cast<double>(wo[i]);
      yr[o] = static_cast<float>(acc);
    }
  }
  return y;
}

DenseGrads dense_backward(const Tensor& x, const Tensor& w, const Tensor& dy) {
  const int n = x.dim(0), in = x.dim(1), out = w.dim(0);
  require(dy.shape == std::vector<int>({n, out}),
          "dense_backward: gradient shape mismatch");

  DenseGrads g{Tensor(x.shape), Tensor(w.shape), Tensor({out})};
  std::vector<double> acc(static_cast<std::size_t>(in));

  // dx = dy * w
  for (int r = 0; r < n; ++r) {
    const float* dyr = dy.data.data() + static_cast<std::size_t>(r) * out;
    for (int i = 0; i < in; ++i) acc[static_cast<std::size_t>(i)] = 0.0;
    for (int o = 0; o < out; ++o) {
      const double d = dyr[o];
      const float* wo = w.data.data() + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) acc[static_cast<std::size_t>(i)] += d * wo[i];
    }
    float* dst = g.dx.data.data() + static_cast<std::size_t>(r) * in;
    for (int i = 0; i < in; ++i)
      dst[i] = static_cast<float>(acc[static_cast<std::size_t>(i)]);
  }

  // dw = dy^T * x, db = column sums of dy
  std::vector<double> dw_acc(static_cast<std::size_t>(out) * in, 0.0);
  std::vector<double> db_acc(static_cast<std::size_t>(out), 0.0);
  for (int r = 0; r < n; ++r) {
    const float* xr = x.data.data() + static_cast<std::size_t>(r) * in;
    const float* dyr = dy.data.data() + static_cast<std::size_t>(r) * out;
    for (int o = 0; o < out; ++o) {
      const double d = dyr[o];
      db_acc[static_cast<std::size_t>(o)] += d;
      double* dwr = dw_acc.data() + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) dwr[i] += d * xr[i];
    }
  }
  for (std::size_t i = 0; i < g.dw.data.size(); ++i)
    g.dw.data[i] = static_cast<float>(dw_acc[i]);
  for (int o = 0; o < out; ++o)
    g.db.data[static_cast<std::size_t>(o)] =
        static_cast<float>(db_acc[static_cast<std::size_t>(o)]);
  return g;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data) v = v > 0.0f ? v : 0.0f;
  return y;
}

Tensor relu_backward(const Tensor& dy, const Tensor& y) {
  require(dy.same_shape(y), "relu_backward: shape mismatch");
  Tensor dx(dy.shape);
  for (std::size_t i = 0; i < dy.data.size(); ++i)
    dx.data[i] = y.data[i] > 0.0f ? dy.data[i] : 0.0f;
  return dx;
}

float sigmoid_scalar(float z) { return 1.0f / (1.0f + std::exp(-z)); }

Tensor sigmoid(const Tensor& x) {
  Tensor y(x.shape);
  for (std::size_t i = 0; i < x.data.size(); ++i)
    y.data[i] = sigmoid_scalar(x.data[i]);
  return y;
}

Tensor sigmoid_backward(const Tensor& dy, const Tensor& y) {
  require(dy.same_shape(y), "sigmoid_backward: shape mismatch");
  Tensor dx(dy.shape);
  for (std::size_t i = 0; i < dy.data.size(); ++i)
    dx.data[i] = dy.data[i] * y.data[i] * (1.0f - y.data[i]);
  return dx;
}

Tensor abs_diff(const Tensor& a, const Tensor& b) {
  require(a.same_shape(b), "abs_diff: shape mismatch " +
                               shape_to_string(a.shape) + " vs " +
                               shape_to_string(b.shape));
  Tensor y(a.shape);
  for (std::size_t i = 0; i < a.data.size(); ++i)
    y.data[i] = std::fabs(a.data[i] - b.data[i]);
  return y;
}

AbsDiffGrads abs_diff_backward(const Tensor& dy, const Tensor& a, const Tensor& b) {
  require(a.same_shape(b) && dy.same_shape(a), "abs_diff_backward: shape mismatch");
  AbsDiffGrads g{Tensor(a.shape), Tensor(b.shape)};
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const float d = a.data[i] - b.data[i];
    const float s = d > 0.0f ? 1.0f : (d < 0.0f ? -1.0f : 0.0f);
    g.da.data[i] = dy.data[i] * s;
    g.db.data[i] = -g.da.data[i];
  }
  return g;
}

float bce_loss(float p, int y) {
  const float pc = std::clamp(p, kProbClamp, 1.0f - kProbClamp);
  return y ? -std::log(pc) : -std::log(1.0f - pc);
}

float bce_backward(float p, int y) {
  const float pc = std::clamp(p, kProbClamp, 1.0f - kProbClamp);
  return y ? -1.0f / pc : 1.0f / (1.0f - pc);
}

float bce_with_logit(float z, int y) {
  // max(z,0) - z*y + log(1 + exp(-|z|))
  const float zy = y ? z : 0.0f;
  return std::max(z, 0.0f) - zy + std::log1p(std::exp(-std::fabs(z)));
}

float softmax_xent_forward(const Tensor& logits, const std::vector<int>& labels,
                           Tensor* probs) {
  require(logits.rank() == 2, "softmax_xent: logits must be (N, C)");
  const int n = logits.dim(0), c = logits.dim(1);
  require(static_cast<int>(labels.size()) == n, "softmax_xent: label count mismatch");
  if (probs) *probs = Tensor({n, c});

  double loss = 0.0;
  for (int r = 0; r < n; ++r) {
    const float* lr = logits.data.data() + static_cast<std::size_t>(r) * c;
    require(labels[static_cast<std::size_t>(r)] >= 0 &&
                labels[static_cast<std::size_t>(r)] < c,
            "softmax_xent: label out of range");
    float mx = lr[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, lr[j]);
    double sum = 0.0;
    for (int j = 0; j < c; ++j) sum += std::exp(static_cast<double>(lr[j]) - mx);
    const double log_sum = std::log(sum);
    loss += log_sum - (static_cast<double>(lr[labels[static_cast<std::size_t>(r)]]) - mx);
    if (probs) {
      float* pr = probs->data.data() + static_cast<std::size_t>(r) * c;
      for (int j = 0; j < c; ++j)
        pr[j] = static_cast<float>(
            std::exp(static_cast<double>(lr[j]) - mx) / sum);
    }
  }
  return static_cast<float>(loss / n);
}

Tensor softmax_xent_backward(const Tensor& probs, const std::vector<int>& labels) {
  const int n = probs.dim(0), c = probs.dim(1);
  Tensor dl(probs.shape);
  const float inv_n = 1.0f / static_cast<float>(n);
  for (int r = 0; r < n; ++r) {
    const float* pr = probs.data.data() + static_cast<std::size_t>(r) * c;
    float* dr = dl.data.data() + static_cast<std::size_t>(r) * c;
    for (int j = 0; j < c; ++j) dr[j] = pr[j] * inv_n;
    dr[labels[static_cast<std::size_t>(r)]] -= inv_n;
  }
  return dl;
}

}  // namespace siamzero
