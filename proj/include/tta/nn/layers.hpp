#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tta/core/rng.hpp"
#include "tta/nn/gemm.hpp"
#include "tta/nn/param.hpp"

// Layers keep parameters; activations live in per-call contexts so one layer
// can serve several forward streams per step (primary batch + secondary
// batch share the encoder) and backward can run per stream, accumulating
// parameter gradients.

namespace tta {

// ---------------------------------------------------------------------------
// Linear
// ---------------------------------------------------------------------------

template <typename Real>
struct LinearCtx {
  Tensor<Real> input;  // (N, in)
};

template <typename Real>
struct Linear {
  Param<Real> weight;  // (in, out)
  Param<Real> bias;    // (out)
  int in = 0, out = 0;

  void build(int in_dim, int out_dim) {
    in = in_dim;
    out = out_dim;
    weight.init_shape({in, out});
    bias.init_shape({out});
  }

  void init(Rng& rng) {
    const double bound = std::sqrt(6.0 / (in + out));
    for (auto& w : weight.value.v) w = static_cast<Real>(rng.uniform(-bound, bound));
    bias.value.fill(Real(0));
  }

  Tensor<Real> forward(const Tensor<Real>& x, LinearCtx<Real>* ctx) const {
    if (x.ndim() != 2 || x.dim(1) != in) throw std::invalid_argument("linear: bad input shape " + x.shape_str());
    const int n = x.dim(0);
    Tensor<Real> y({n, out});
    matmul(x.data(), weight.value.data(), y.data(), n, in, out);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < out; ++j) y[i * out + j] += bias.value[j];
    if (ctx) ctx->input = x;
    return y;
  }

  Tensor<Real> backward(const Tensor<Real>& gy, const LinearCtx<Real>& ctx) {
    const int n = gy.dim(0);
    matmul_acc_at_b(ctx.input.data(), gy.data(), weight.grad.data(), n, in, out);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < out; ++j) bias.grad[j] += gy[i * out + j];
    Tensor<Real> gx({n, in});
    const std::vector<Real> wt = transposed(weight.value.data(), in, out);
    matmul(gy.data(), wt.data(), gx.data(), n, out, in);
    return gx;
  }
};

// ---------------------------------------------------------------------------
// ReLU
// ---------------------------------------------------------------------------

template <typename Real>
struct ReluCtx {
  Tensor<Real> output;
};

template <typename Real>
Tensor<Real> relu(const Tensor<Real>& x, ReluCtx<Real>* ctx) {
  Tensor<Real> y = x;
  for (auto& v : y.v) v = v > Real(0) ? v : Real(0);
  if (ctx) ctx->output = y;
  return y;
}

template <typename Real>
Tensor<Real> relu_backward(const Tensor<Real>& gy, const ReluCtx<Real>& ctx) {
  Tensor<Real> gx = gy;
  for (std::int64_t i = 0; i < gx.size(); ++i)
    if (!(ctx.output[i] > Real(0))) gx[i] = Real(0);
  return gx;
}

// ---------------------------------------------------------------------------
// Conv2d: 3x3, stride 1, zero padding 1, NHWC, no bias (a BN layer follows)
// ---------------------------------------------------------------------------

template <typename Real>
struct Conv2dCtx {
  Tensor<Real> cols;  // (N*H*W, 9*Cin)
  int n = 0, h = 0, w = 0;
};

template <typename Real>
struct Conv2d {
  Param<Real> weight;  // (3, 3, Cin, Cout), flat (9*Cin, Cout) for GEMM
  int cin = 0, cout = 0;

  void build(int in_channels, int out_channels) {
    cin = in_channels;
    cout = out_channels;
    weight.init_shape({3, 3, cin, cout});
  }

  void init(Rng& rng) {
    const double std = std::sqrt(2.0 / (9.0 * cin));  // He init, ReLU follows
    for (auto& w : weight.value.v) w = static_cast<Real>(rng.normal(0.0, std));
  }

  Tensor<Real> forward(const Tensor<Real>& x, Conv2dCtx<Real>* ctx) const {
    if (x.ndim() != 4 || x.dim(3) != cin) throw std::invalid_argument("conv2d: bad input shape " + x.shape_str());
    const int n = x.dim(0), h = x.dim(1), w = x.dim(2);
    Tensor<Real> cols({n * h * w, 9 * cin});
    im2col(x, cols);
    Tensor<Real> y({n, h, w, cout});
    matmul(cols.data(), weight.value.data(), y.data(), n * h * w, 9 * cin, cout);
    if (ctx) {
      ctx->cols = std::move(cols);
      ctx->n = n;
      ctx->h = h;
      ctx->w = w;
    }
    return y;
  }

  Tensor<Real> backward(const Tensor<Real>& gy, const Conv2dCtx<Real>& ctx) {
    const int n = ctx.n, h = ctx.h, w = ctx.w;
    const int rows = n * h * w;
    matmul_acc_at_b(ctx.cols.data(), gy.data(), weight.grad.data(), rows, 9 * cin, cout);
    Tensor<Real> gcols({rows, 9 * cin});
    const std::vector<Real> wt = transposed(weight.value.data(), 9 * cin, cout);
    matmul(gy.data(), wt.data(), gcols.data(), rows, cout, 9 * cin);
    Tensor<Real> gx({n, h, w, cin});
    col2im(gcols, gx);
    return gx;
  }

 private:
  void im2col(const Tensor<Real>& x, Tensor<Real>& cols) const {
    const int n = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int row_len = 9 * cin;
    for (int b = 0; b < n; ++b) {
      const Real* xb = x.data() + static_cast<std::int64_t>(b) * h * w * cin;
      Real* rb = cols.data() + static_cast<std::int64_t>(b) * h * w * row_len;
      for (int i = 0; i < h; ++i) {
        for (int dy = -1; dy <= 1; ++dy) {
          const int sy = i + dy;
          if (sy < 0 || sy >= h) continue;
          const Real* xrow = xb + static_cast<std::int64_t>(sy) * w * cin;
          const int koff = (dy + 1) * 3 * cin;
          Real* orow = rb + static_cast<std::int64_t>(i) * w * row_len;
          for (int j = 0; j < w; ++j) {
            Real* dst = orow + static_cast<std::int64_t>(j) * row_len + koff;
            for (int dx = -1; dx <= 1; ++dx) {
              const int sx = j + dx;
              if (sx < 0 || sx >= w) continue;
              const Real* src = xrow + static_cast<std::int64_t>(sx) * cin;
              Real* d = dst + (dx + 1) * cin;
              for (int c = 0; c < cin; ++c) d[c] = src[c];
            }
          }
        }
      }
    }
  }

  void col2im(const Tensor<Real>& gcols, Tensor<Real>& gx) const {
    const int n = gx.dim(0), h = gx.dim(1), w = gx.dim(2);
    const int row_len = 9 * cin;
    for (int b = 0; b < n; ++b) {
      Real* xb = gx.data() + static_cast<std::int64_t>(b) * h * w * cin;
      const Real* rb = gcols.data() + static_cast<std::int64_t>(b) * h * w * row_len;
      for (int i = 0; i < h; ++i) {
        for (int dy = -1; dy <= 1; ++dy) {
          const int sy = i + dy;
          if (sy < 0 || sy >= h) continue;
          Real* xrow = xb + static_cast<std::int64_t>(sy) * w * cin;
          const int koff = (dy + 1) * 3 * cin;
          const Real* grow = rb + static_cast<std::int64_t>(i) * w * row_len;
          for (int j = 0; j < w; ++j) {
            const Real* src0 = grow + static_cast<std::int64_t>(j) * row_len + koff;
            for (int dx = -1; dx <= 1; ++dx) {
              const int sx = j + dx;
              if (sx < 0 || sx >= w) continue;
              Real* d = xrow + static_cast<std::int64_t>(sx) * cin;
              const Real* src = src0 + (dx + 1) * cin;
              for (int c = 0; c < cin; ++c) d[c] += src[c];
            }
          }
        }
      }
    }
  }
};

// ---------------------------------------------------------------------------
// BatchNorm2d over NHWC channels
// ---------------------------------------------------------------------------

/// How a batch-norm forward treats statistics. Training uses batch stats;
/// eval uses running stats. `update_running` is the lead-forward privilege:
/// in joint training only the primary pass refreshes running estimates.
struct BnMode {
  bool use_batch_stats = false;
  bool update_running = false;

  static BnMode train() { return {true, true}; }
  static BnMode train_no_update() { return {true, false}; }
  static BnMode eval() { return {false, false}; }
};

template <typename Real>
struct BatchNormCtx {
  Tensor<Real> xhat;            // (N,H,W,C)
  std::vector<Real> inv_std;    // per channel
  bool batch_stats = false;
  std::int64_t rows = 0;
};

template <typename Real>
struct BatchNorm2d {
  Param<Real> gamma, beta;              // trainable affine
  Param<Real> running_mean, running_var;  // population statistics (biased var)
  int channels = 0;
  Real momentum = Real(0.1);
  Real eps = Real(1e-5);

  // AdaBN statistic collection (enabled between begin/finish_stat_collection)
  bool collecting = false;
  std::vector<double> acc_sum, acc_sumsq;
  std::int64_t acc_count = 0;

  void build(int c) {
    channels = c;
    gamma.init_shape({c});
    beta.init_shape({c});
    running_mean.init_shape({c});
    running_var.init_shape({c});
    gamma.value.fill(Real(1));
    beta.value.fill(Real(0));
    running_mean.value.fill(Real(0));
    running_var.value.fill(Real(1));
    gamma.affine = beta.affine = true;
    running_mean.bn_stat = running_var.bn_stat = true;
  }

  Tensor<Real> forward(const Tensor<Real>& x, BnMode mode, BatchNormCtx<Real>* ctx) {
    if (x.ndim() != 4 || x.dim(3) != channels)
      throw std::invalid_argument("batchnorm: bad input shape " + x.shape_str());
    const std::int64_t rows = static_cast<std::int64_t>(x.dim(0)) * x.dim(1) * x.dim(2);
    std::vector<Real> mean(channels), var(channels);
    if (mode.use_batch_stats || collecting) {
      std::vector<double> s(channels, 0.0), s2(channels, 0.0);
      const Real* p = x.data();
      for (std::int64_t r = 0; r < rows; ++r, p += channels)
        for (int c = 0; c < channels; ++c) {
          const double v = static_cast<double>(p[c]);
          s[c] += v;
          s2[c] += v * v;
        }
      if (mode.use_batch_stats) {
        for (int c = 0; c < channels; ++c) {
          const double m = s[c] / static_cast<double>(rows);
          mean[c] = static_cast<Real>(m);
          var[c] = static_cast<Real>(std::max(0.0, s2[c] / static_cast<double>(rows) - m * m));
        }
        if (mode.update_running) {
          for (int c = 0; c < channels; ++c) {
            running_mean.value[c] = (Real(1) - momentum) * running_mean.value[c] + momentum * mean[c];
            running_var.value[c] = (Real(1) - momentum) * running_var.value[c] + momentum * var[c];
          }
        }
      }
      if (collecting) {
        for (int c = 0; c < channels; ++c) {
          acc_sum[static_cast<size_t>(c)] += s[static_cast<size_t>(c)];
          acc_sumsq[static_cast<size_t>(c)] += s2[static_cast<size_t>(c)];
        }
        acc_count += rows;
      }
    }
    if (!mode.use_batch_stats) {
      for (int c = 0; c < channels; ++c) {
        mean[c] = running_mean.value[c];
        var[c] = running_var.value[c];
      }
    }

    std::vector<Real> inv_std(channels);
    for (int c = 0; c < channels; ++c)
      inv_std[c] = Real(1) / static_cast<Real>(std::sqrt(static_cast<double>(var[c]) + static_cast<double>(eps)));

    Tensor<Real> y(x.shape);
    Tensor<Real> xhat(x.shape);
    const Real* p = x.data();
    Real* ph = xhat.data();
    Real* py = y.data();
    for (std::int64_t r = 0; r < rows; ++r, p += channels, ph += channels, py += channels)
      for (int c = 0; c < channels; ++c) {
        const Real h = (p[c] - mean[c]) * inv_std[c];
        ph[c] = h;
        py[c] = gamma.value[c] * h + beta.value[c];
      }
    if (ctx) {
      ctx->xhat = std::move(xhat);
      ctx->inv_std = std::move(inv_std);
      ctx->batch_stats = mode.use_batch_stats;
      ctx->rows = rows;
    }
    return y;
  }

  Tensor<Real> backward(const Tensor<Real>& gy, const BatchNormCtx<Real>& ctx) {
    const std::int64_t rows = ctx.rows;
    std::vector<double> sum_g(channels, 0.0), sum_gx(channels, 0.0);
    {
      const Real* pg = gy.data();
      const Real* ph = ctx.xhat.data();
      for (std::int64_t r = 0; r < rows; ++r, pg += channels, ph += channels)
        for (int c = 0; c < channels; ++c) {
          sum_g[c] += static_cast<double>(pg[c]);
          sum_gx[c] += static_cast<double>(pg[c]) * static_cast<double>(ph[c]);
        }
    }
    for (int c = 0; c < channels; ++c) {
      beta.grad[c] += static_cast<Real>(sum_g[c]);
      gamma.grad[c] += static_cast<Real>(sum_gx[c]);
    }
    Tensor<Real> gx(ctx.xhat.shape);
    const Real* pg = gy.data();
    const Real* ph = ctx.xhat.data();
    Real* px = gx.data();
    if (ctx.batch_stats) {
      const double inv_n = 1.0 / static_cast<double>(rows);
      for (std::int64_t r = 0; r < rows; ++r, pg += channels, ph += channels, px += channels)
        for (int c = 0; c < channels; ++c) {
          const double t = static_cast<double>(pg[c]) - inv_n * sum_g[c] -
                           static_cast<double>(ph[c]) * inv_n * sum_gx[c];
          px[c] = static_cast<Real>(static_cast<double>(gamma.value[c]) *
                                    static_cast<double>(ctx.inv_std[c]) * t);
        }
    } else {
      for (std::int64_t r = 0; r < rows; ++r, pg += channels, px += channels)
        for (int c = 0; c < channels; ++c) px[c] = pg[c] * gamma.value[c] * ctx.inv_std[c];
    }
    return gx;
  }

  void begin_stat_collection() {
    collecting = true;
    acc_sum.assign(static_cast<size_t>(channels), 0.0);
    acc_sumsq.assign(static_cast<size_t>(channels), 0.0);
    acc_count = 0;
  }

  /// Replace running statistics with the exact statistics of everything seen
  /// since begin_stat_collection().
  void finish_stat_collection() {
    collecting = false;
    if (acc_count == 0) throw std::invalid_argument("batchnorm: no data collected");
    for (int c = 0; c < channels; ++c) {
      const double m = acc_sum[static_cast<size_t>(c)] / static_cast<double>(acc_count);
      const double v = std::max(0.0, acc_sumsq[static_cast<size_t>(c)] / static_cast<double>(acc_count) - m * m);
      running_mean.value[c] = static_cast<Real>(m);
      running_var.value[c] = static_cast<Real>(v);
    }
  }
};

// ---------------------------------------------------------------------------
// 2x2 average pool, stride 2, ceil mode (partial windows average what they
// cover, so odd sizes like the 526-pixel input are accepted)
// ---------------------------------------------------------------------------

template <typename Real>
struct AvgPoolCtx {
  int n = 0, h = 0, w = 0, c = 0;
};

template <typename Real>
Tensor<Real> avgpool2(const Tensor<Real>& x, AvgPoolCtx<Real>* ctx) {
  const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  const int oh = (h + 1) / 2, ow = (w + 1) / 2;
  Tensor<Real> y({n, oh, ow, c});
  for (int b = 0; b < n; ++b)
    for (int i = 0; i < oh; ++i)
      for (int j = 0; j < ow; ++j) {
        const int y0 = 2 * i, x0 = 2 * j;
        const int yc = std::min(2, h - y0), xc = std::min(2, w - x0);
        Real* dst = y.data() + (((static_cast<std::int64_t>(b) * oh + i) * ow + j) * c);
        const Real inv = Real(1) / static_cast<Real>(yc * xc);
        for (int ch = 0; ch < c; ++ch) dst[ch] = Real(0);
        for (int dy = 0; dy < yc; ++dy)
          for (int dx = 0; dx < xc; ++dx) {
            const Real* src =
                x.data() + (((static_cast<std::int64_t>(b) * h + (y0 + dy)) * w + (x0 + dx)) * c);
            for (int ch = 0; ch < c; ++ch) dst[ch] += src[ch];
          }
        for (int ch = 0; ch < c; ++ch) dst[ch] *= inv;
      }
  if (ctx) {
    ctx->n = n;
    ctx->h = h;
    ctx->w = w;
    ctx->c = c;
  }
  return y;
}

template <typename Real>
Tensor<Real> avgpool2_backward(const Tensor<Real>& gy, const AvgPoolCtx<Real>& ctx) {
  const int n = ctx.n, h = ctx.h, w = ctx.w, c = ctx.c;
  const int oh = (h + 1) / 2, ow = (w + 1) / 2;
  Tensor<Real> gx({n, h, w, c});
  for (int b = 0; b < n; ++b)
    for (int i = 0; i < oh; ++i)
      for (int j = 0; j < ow; ++j) {
        const int y0 = 2 * i, x0 = 2 * j;
        const int yc = std::min(2, h - y0), xc = std::min(2, w - x0);
        const Real* src = gy.data() + (((static_cast<std::int64_t>(b) * oh + i) * ow + j) * c);
        const Real inv = Real(1) / static_cast<Real>(yc * xc);
        for (int dy = 0; dy < yc; ++dy)
          for (int dx = 0; dx < xc; ++dx) {
            Real* dst =
                gx.data() + (((static_cast<std::int64_t>(b) * h + (y0 + dy)) * w + (x0 + dx)) * c);
            for (int ch = 0; ch < c; ++ch) dst[ch] += src[ch] * inv;
          }
      }
  return gx;
}

// ---------------------------------------------------------------------------
// Global average pool: (N,H,W,C) -> (N,C)
// ---------------------------------------------------------------------------

template <typename Real>
struct GapCtx {
  int h = 0, w = 0;
};

template <typename Real>
Tensor<Real> global_avgpool(const Tensor<Real>& x, GapCtx<Real>* ctx) {
  const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  Tensor<Real> y({n, c});
  const Real inv = Real(1) / static_cast<Real>(h * w);
  for (int b = 0; b < n; ++b) {
    const Real* src = x.data() + static_cast<std::int64_t>(b) * h * w * c;
    Real* dst = y.data() + static_cast<std::int64_t>(b) * c;
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(h) * w; ++r, src += c)
      for (int ch = 0; ch < c; ++ch) dst[ch] += src[ch];
    for (int ch = 0; ch < c; ++ch) dst[ch] *= inv;
  }
  if (ctx) {
    ctx->h = h;
    ctx->w = w;
  }
  return y;
}

template <typename Real>
Tensor<Real> global_avgpool_backward(const Tensor<Real>& gy, const GapCtx<Real>& ctx) {
  const int n = gy.dim(0), c = gy.dim(1);
  Tensor<Real> gx({n, ctx.h, ctx.w, c});
  const Real inv = Real(1) / static_cast<Real>(ctx.h * ctx.w);
  for (int b = 0; b < n; ++b) {
    const Real* src = gy.data() + static_cast<std::int64_t>(b) * c;
    Real* dst = gx.data() + static_cast<std::int64_t>(b) * ctx.h * ctx.w * c;
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(ctx.h) * ctx.w; ++r, dst += c)
      for (int ch = 0; ch < c; ++ch) dst[ch] = src[ch] * inv;
  }
  return gx;
}

}  // namespace tta
