#pragma once

#include <string>
#include <vector>

#include "tta/model/config.hpp"
#include "tta/nn/layers.hpp"

namespace tta {

/// Shared encoder: per block conv3x3 -> BN -> ReLU -> 2x2 average pool,
/// then global average pool and a linear map to the latent space.
template <typename Real>
class ConvEncoder {
 public:
  struct BlockCtx {
    Conv2dCtx<Real> conv;
    BatchNormCtx<Real> bn;
    ReluCtx<Real> relu;
    AvgPoolCtx<Real> pool;
  };
  struct Ctx {
    std::vector<BlockCtx> blocks;
    GapCtx<Real> gap;
    LinearCtx<Real> fc;
  };

  void build(const ModelConfig& cfg) {
    image_size_ = cfg.image_size;
    int cin = 3;
    blocks_.resize(cfg.channels.size());
    for (size_t b = 0; b < cfg.channels.size(); ++b) {
      blocks_[b].conv.build(cin, cfg.channels[b]);
      blocks_[b].bn.build(cfg.channels[b]);
      blocks_[b].bn.momentum = static_cast<Real>(cfg.bn_momentum);
      blocks_[b].bn.eps = static_cast<Real>(cfg.bn_eps);
      cin = cfg.channels[b];
    }
    fc_.build(cin, cfg.latent_dim);
  }

  void init(std::uint64_t seed) {
    for (size_t b = 0; b < blocks_.size(); ++b) {
      Rng r(derive_seed(seed, "encoder.conv", b));
      blocks_[b].conv.init(r);
    }
    Rng r(derive_seed(seed, "encoder.fc"));
    fc_.init(r);
  }

  Tensor<Real> forward(const Tensor<Real>& images, BnMode mode, Ctx* ctx) {
    if (images.ndim() != 4 || images.dim(3) != 3)
      throw std::invalid_argument("encode: expected NHWC image batch, got " + images.shape_str());
    if (images.dim(0) < 1) throw std::invalid_argument("encode: empty batch");
    if (images.dim(1) != image_size_ || images.dim(2) != image_size_)
      throw std::invalid_argument("encode: image size " + images.shape_str() + " does not match configured " +
                                  std::to_string(image_size_));
    if (ctx) ctx->blocks.resize(blocks_.size());
    Tensor<Real> x = images;
    for (size_t b = 0; b < blocks_.size(); ++b) {
      BlockCtx* bc = ctx ? &ctx->blocks[b] : nullptr;
      x = blocks_[b].conv.forward(x, bc ? &bc->conv : nullptr);
      x = blocks_[b].bn.forward(x, mode, bc ? &bc->bn : nullptr);
      x = relu(x, bc ? &bc->relu : nullptr);
      x = avgpool2(x, bc ? &bc->pool : nullptr);
    }
    x = global_avgpool(x, ctx ? &ctx->gap : nullptr);
    return fc_.forward(x, ctx ? &ctx->fc : nullptr);
  }

  /// Accumulates parameter gradients; the input gradient is discarded.
  void backward(const Tensor<Real>& glatent, const Ctx& ctx) {
    Tensor<Real> g = fc_.backward(glatent, ctx.fc);
    g = global_avgpool_backward(g, ctx.gap);
    for (size_t b = blocks_.size(); b-- > 0;) {
      g = avgpool2_backward(g, ctx.blocks[b].pool);
      g = relu_backward(g, ctx.blocks[b].relu);
      g = blocks_[b].bn.backward(g, ctx.blocks[b].bn);
      g = blocks_[b].conv.backward(g, ctx.blocks[b].conv);
    }
  }

  void begin_bn_collect() {
    for (auto& b : blocks_) b.bn.begin_stat_collection();
  }
  void finish_bn_collect() {
    for (auto& b : blocks_) b.bn.finish_stat_collection();
  }

  template <typename Fn>
  void visit_params(Fn&& fn) {
    for (size_t b = 0; b < blocks_.size(); ++b) {
      const std::string prefix = "encoder.block" + std::to_string(b);
      fn(prefix + ".conv.weight", blocks_[b].conv.weight);
      fn(prefix + ".bn.gamma", blocks_[b].bn.gamma);
      fn(prefix + ".bn.beta", blocks_[b].bn.beta);
      fn(prefix + ".bn.running_mean", blocks_[b].bn.running_mean);
      fn(prefix + ".bn.running_var", blocks_[b].bn.running_var);
    }
    fn("encoder.fc.weight", fc_.weight);
    fn("encoder.fc.bias", fc_.bias);
  }

  int n_bn_layers() const { return static_cast<int>(blocks_.size()); }
  int image_size() const { return image_size_; }

 private:
  struct Block {
    Conv2d<Real> conv;
    BatchNorm2d<Real> bn;
  };
  std::vector<Block> blocks_;
  Linear<Real> fc_;
  int image_size_ = 0;
};

}  // namespace tta
