#pragma once

#include <array>

#include "tta/model/config.hpp"
#include "tta/nn/layers.hpp"

namespace tta {

/// Resolution-sequence head. Latents arrive example-major: rows
/// (3n, 3n+1, 3n+2) are the three displayed positions of example n.
/// Each unordered position pair is concatenated, pushed through one shared
/// two-layer MLP, the three pair outputs are concatenated and classified
/// into the 6 orderings by a second two-layer MLP.
template <typename Real>
class RspHead {
 public:
  struct Ctx {
    Tensor<Real> pair_in;  // (3N, 2D)
    LinearCtx<Real> p1, p2, c1, c2;
    ReluCtx<Real> pr, cr;
    int n = 0;
  };

  void build(const ModelConfig& cfg) {
    latent_dim_ = cfg.latent_dim;
    pair_fc1_.build(2 * cfg.latent_dim, cfg.rsp_pair_hidden);
    pair_fc2_.build(cfg.rsp_pair_hidden, cfg.rsp_pair_out);
    cls_fc1_.build(3 * cfg.rsp_pair_out, cfg.rsp_cls_hidden);
    cls_fc2_.build(cfg.rsp_cls_hidden, 6);
  }

  void init(std::uint64_t seed) {
    Rng r1(derive_seed(seed, "rsp.pair_fc1")), r2(derive_seed(seed, "rsp.pair_fc2"));
    Rng r3(derive_seed(seed, "rsp.cls_fc1")), r4(derive_seed(seed, "rsp.cls_fc2"));
    pair_fc1_.init(r1);
    pair_fc2_.init(r2);
    cls_fc1_.init(r3);
    cls_fc2_.init(r4);
  }

  Tensor<Real> forward(const Tensor<Real>& latents, Ctx* ctx) {
    if (latents.ndim() != 2 || latents.dim(1) != latent_dim_ || latents.dim(0) % 3 != 0)
      throw std::invalid_argument("rsp head: expected (3N, latent_dim) latents, got " +
                                  latents.shape_str());
    const int n = latents.dim(0) / 3;
    const int d = latent_dim_;
    Tensor<Real> pair_in({3 * n, 2 * d});
    for (int e = 0; e < n; ++e) {
      const Real* l0 = latents.data() + static_cast<std::int64_t>(3 * e) * d;
      const Real* l1 = l0 + d;
      const Real* l2 = l1 + d;
      // pairs in fixed order (0,1), (0,2), (1,2)
      const std::array<std::pair<const Real*, const Real*>, 3> pairs = {
          std::make_pair(l0, l1), std::make_pair(l0, l2), std::make_pair(l1, l2)};
      for (int p = 0; p < 3; ++p) {
        Real* dst = pair_in.data() + static_cast<std::int64_t>(3 * e + p) * 2 * d;
        std::copy(pairs[p].first, pairs[p].first + d, dst);
        std::copy(pairs[p].second, pairs[p].second + d, dst + d);
      }
    }
    Ctx scratch;
    Ctx* c = ctx ? ctx : &scratch;
    c->n = n;
    Tensor<Real> h = pair_fc1_.forward(pair_in, &c->p1);
    h = relu(h, &c->pr);
    h = pair_fc2_.forward(h, &c->p2);
    // (3N, P) rows are consecutive per example, so this buffer is already the
    // (N, 3P) concatenation.
    h = h.reshaped({n, 3 * pair_fc2_.out});
    h = cls_fc1_.forward(h, &c->c1);
    h = relu(h, &c->cr);
    Tensor<Real> logits = cls_fc2_.forward(h, &c->c2);
    if (ctx) ctx->pair_in = std::move(pair_in);
    return logits;
  }

  /// Returns the gradient w.r.t. the (3N, D) latents.
  Tensor<Real> backward(const Tensor<Real>& glogits, const Ctx& ctx) {
    const int n = ctx.n, d = latent_dim_;
    Tensor<Real> g = cls_fc2_.backward(glogits, ctx.c2);
    g = relu_backward(g, ctx.cr);
    g = cls_fc1_.backward(g, ctx.c1);
    g = g.reshaped({3 * n, pair_fc2_.out});
    g = pair_fc2_.backward(g, ctx.p2);
    g = relu_backward(g, ctx.pr);
    g = pair_fc1_.backward(g, ctx.p1);  // (3N, 2D)
    Tensor<Real> glat({3 * n, d});
    for (int e = 0; e < n; ++e) {
      Real* g0 = glat.data() + static_cast<std::int64_t>(3 * e) * d;
      Real* g1 = g0 + d;
      Real* g2 = g1 + d;
      const std::array<std::pair<Real*, Real*>, 3> pairs = {
          std::make_pair(g0, g1), std::make_pair(g0, g2), std::make_pair(g1, g2)};
      for (int p = 0; p < 3; ++p) {
        const Real* src = g.data() + static_cast<std::int64_t>(3 * e + p) * 2 * d;
        for (int k = 0; k < d; ++k) pairs[p].first[k] += src[k];
        for (int k = 0; k < d; ++k) pairs[p].second[k] += src[d + k];
      }
    }
    return glat;
  }

  int pair_input_width() const { return pair_fc1_.in; }

  template <typename Fn>
  void visit_params(Fn&& fn) {
    fn("secondary.rsp.pair_fc1.weight", pair_fc1_.weight);
    fn("secondary.rsp.pair_fc1.bias", pair_fc1_.bias);
    fn("secondary.rsp.pair_fc2.weight", pair_fc2_.weight);
    fn("secondary.rsp.pair_fc2.bias", pair_fc2_.bias);
    fn("secondary.rsp.cls_fc1.weight", cls_fc1_.weight);
    fn("secondary.rsp.cls_fc1.bias", cls_fc1_.bias);
    fn("secondary.rsp.cls_fc2.weight", cls_fc2_.weight);
    fn("secondary.rsp.cls_fc2.bias", cls_fc2_.bias);
  }

 private:
  Linear<Real> pair_fc1_, pair_fc2_, cls_fc1_, cls_fc2_;
  int latent_dim_ = 0;
};

/// SimCLR projection head: two-layer MLP from the latent space to the space
/// the contrastive loss is applied on.
template <typename Real>
class ProjectionHead {
 public:
  struct Ctx {
    LinearCtx<Real> fc1, fc2;
    ReluCtx<Real> r;
  };

  void build(const ModelConfig& cfg) {
    fc1_.build(cfg.latent_dim, cfg.proj_hidden);
    fc2_.build(cfg.proj_hidden, cfg.proj_dim);
  }

  void init(std::uint64_t seed) {
    Rng r1(derive_seed(seed, "proj.fc1")), r2(derive_seed(seed, "proj.fc2"));
    fc1_.init(r1);
    fc2_.init(r2);
  }

  Tensor<Real> forward(const Tensor<Real>& latents, Ctx* ctx) {
    Ctx scratch;
    Ctx* c = ctx ? ctx : &scratch;
    Tensor<Real> h = fc1_.forward(latents, &c->fc1);
    h = relu(h, &c->r);
    return fc2_.forward(h, &c->fc2);
  }

  Tensor<Real> backward(const Tensor<Real>& gproj, const Ctx& ctx) {
    Tensor<Real> g = fc2_.backward(gproj, ctx.fc2);
    g = relu_backward(g, ctx.r);
    return fc1_.backward(g, ctx.fc1);
  }

  template <typename Fn>
  void visit_params(Fn&& fn) {
    fn("secondary.proj.fc1.weight", fc1_.weight);
    fn("secondary.proj.fc1.bias", fc1_.bias);
    fn("secondary.proj.fc2.weight", fc2_.weight);
    fn("secondary.proj.fc2.bias", fc2_.bias);
  }

 private:
  Linear<Real> fc1_, fc2_;
};

}  // namespace tta
