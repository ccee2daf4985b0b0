#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tta/core/digest.hpp"
#include "tta/model/encoder.hpp"
#include "tta/model/heads.hpp"

namespace tta {

/// Ordered copy of every parameter value and batch-norm statistic, plus a
/// content digest. restore() after an arbitrary perturbation brings the model
/// back bit-identically — the backbone of episodic adaptation.
template <typename Real>
struct ParamSnapshot {
  struct Entry {
    std::string name;
    Tensor<Real> value;
  };
  std::vector<Entry> entries;
  std::uint64_t digest = 0;
};

/// Parameter role tags accepted by partition(): the three roles plus the
/// two encoder sub-tags.
inline const std::set<std::string>& known_role_tags() {
  static const std::set<std::string> tags = {"encoder", "primary", "secondary", "affine", "bn_stats"};
  return tags;
}

template <typename Real>
class ModelBundle {
 public:
  explicit ModelBundle(const ModelConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    encoder_.build(cfg_);
    primary_head_.build(cfg_.latent_dim, 3);
    if (cfg_.task == TaskKind::rsp) {
      rsp_head_ = std::make_unique<RspHead<Real>>();
      rsp_head_->build(cfg_);
    } else {
      proj_head_ = std::make_unique<ProjectionHead<Real>>();
      proj_head_->build(cfg_);
    }
    init_params();
    register_params();
  }

  ModelBundle(const ModelBundle&) = delete;
  ModelBundle& operator=(const ModelBundle&) = delete;

  std::unique_ptr<ModelBundle> clone() const {
    auto copy = std::make_unique<ModelBundle>(cfg_);
    copy->restore(snapshot());
    return copy;
  }

  const ModelConfig& config() const { return cfg_; }
  TaskKind task() const { return cfg_.task; }

  // -- forward ops ----------------------------------------------------------

  Tensor<Real> encode(const Tensor<Real>& images, BnMode mode = BnMode::eval(),
                      typename ConvEncoder<Real>::Ctx* ctx = nullptr) {
    return encoder_.forward(images, mode, ctx);
  }

  Tensor<Real> predict_primary(const Tensor<Real>& latents, LinearCtx<Real>* ctx = nullptr) {
    if (latents.ndim() != 2 || latents.dim(1) != cfg_.latent_dim)
      throw std::invalid_argument("predict_primary: expected (N, latent_dim) latents");
    return primary_head_.forward(latents, ctx);
  }

  Tensor<Real> forward_rsp(const Tensor<Real>& latents, typename RspHead<Real>::Ctx* ctx = nullptr) {
    require_task(TaskKind::rsp);
    return rsp_head_->forward(latents, ctx);
  }

  Tensor<Real> forward_projection(const Tensor<Real>& latents,
                                  typename ProjectionHead<Real>::Ctx* ctx = nullptr) {
    require_task(TaskKind::simclr);
    return proj_head_->forward(latents, ctx);
  }

  /// End-to-end primary prediction in eval mode.
  Tensor<Real> infer_logits(const Tensor<Real>& images) {
    return predict_primary(encode(images, BnMode::eval(), nullptr), nullptr);
  }

  // -- whole-path contexts (forward + backward through the shared encoder) ---

  struct PrimaryPath {
    typename ConvEncoder<Real>::Ctx enc;
    LinearCtx<Real> head;
    Tensor<Real> latents, logits;
  };

  PrimaryPath forward_primary_path(const Tensor<Real>& images, BnMode mode) {
    PrimaryPath p;
    p.latents = encoder_.forward(images, mode, &p.enc);
    p.logits = primary_head_.forward(p.latents, &p.head);
    return p;
  }

  void backward_primary_path(const Tensor<Real>& glogits, const PrimaryPath& path) {
    Tensor<Real> glat = primary_head_.backward(glogits, path.head);
    encoder_.backward(glat, path.enc);
  }

  /// Backward through the encoder only (used by the entropy objectives where
  /// the head gradient is already folded into glogits).

  struct RspPath {
    typename ConvEncoder<Real>::Ctx enc;
    typename RspHead<Real>::Ctx head;
    Tensor<Real> latents, logits;
  };

  RspPath forward_rsp_path(const Tensor<Real>& patch_batch /* (3N,S,S,3) example-major */,
                           BnMode mode) {
    require_task(TaskKind::rsp);
    RspPath p;
    p.latents = encoder_.forward(patch_batch, mode, &p.enc);
    p.logits = rsp_head_->forward(p.latents, &p.head);
    return p;
  }

  void backward_rsp_path(const Tensor<Real>& glogits, const RspPath& path) {
    Tensor<Real> glat = rsp_head_->backward(glogits, path.head);
    encoder_.backward(glat, path.enc);
  }

  struct ProjectionPath {
    typename ConvEncoder<Real>::Ctx enc;
    typename ProjectionHead<Real>::Ctx head;
    Tensor<Real> latents, projections;
  };

  ProjectionPath forward_projection_path(const Tensor<Real>& views, BnMode mode) {
    require_task(TaskKind::simclr);
    ProjectionPath p;
    p.latents = encoder_.forward(views, mode, &p.enc);
    p.projections = proj_head_->forward(p.latents, &p.head);
    return p;
  }

  void backward_projection_path(const Tensor<Real>& gproj, const ProjectionPath& path) {
    Tensor<Real> glat = proj_head_->backward(gproj, path.head);
    encoder_.backward(glat, path.enc);
  }

  // -- parameter machinery ----------------------------------------------------

  const std::vector<Param<Real>*>& params() const { return params_; }

  std::vector<Param<Real>*> trainable_params() const {
    std::vector<Param<Real>*> out;
    for (auto* p : params_)
      if (p->trainable()) out.push_back(p);
    return out;
  }

  /// Parameters carrying any of the requested tags. "encoder"/"primary"/
  /// "secondary" select trainable parameters by role, "affine" the BN
  /// scale/shift pairs, "bn_stats" the running statistics.
  std::vector<Param<Real>*> partition(const std::set<std::string>& tags) const {
    for (const auto& t : tags)
      if (!known_role_tags().count(t)) throw std::invalid_argument("partition: unknown role tag " + t);
    std::vector<Param<Real>*> out;
    for (auto* p : params_) {
      bool take = false;
      if (p->trainable() && tags.count(role_name(p->role))) take = true;
      if (p->affine && tags.count("affine")) take = true;
      if (p->bn_stat && tags.count("bn_stats")) take = true;
      if (take) out.push_back(p);
    }
    return out;
  }

  ParamSnapshot<Real> snapshot() const {
    ParamSnapshot<Real> s;
    s.entries.reserve(params_.size());
    Digest d;
    for (const auto* p : params_) {
      d.update(p->name);
      d.update_vec(p->value.shape);
      d.update_vec(p->value.v);
      s.entries.push_back({p->name, p->value});
    }
    s.digest = d.value();
    return s;
  }

  void restore(const ParamSnapshot<Real>& s) {
    if (s.entries.size() != params_.size())
      throw std::invalid_argument("restore: snapshot has " + std::to_string(s.entries.size()) +
                                  " entries, model has " + std::to_string(params_.size()));
    for (size_t i = 0; i < params_.size(); ++i) {
      if (s.entries[i].name != params_[i]->name || s.entries[i].value.shape != params_[i]->value.shape)
        throw std::invalid_argument("restore: snapshot entry " + s.entries[i].name +
                                    " does not match model parameter " + params_[i]->name);
      params_[i]->value.v = s.entries[i].value.v;
    }
  }

  /// Digest over every parameter and BN statistic.
  std::uint64_t digest() const {
    Digest d;
    for (const auto* p : params_) {
      d.update(p->name);
      d.update_vec(p->value.shape);
      d.update_vec(p->value.v);
    }
    return d.value();
  }

  std::uint64_t digest_of(const std::vector<Param<Real>*>& subset) const {
    Digest d;
    for (const auto* p : subset) {
      d.update(p->name);
      d.update_vec(p->value.v);
    }
    return d.value();
  }

  void zero_grad() {
    for (auto* p : params_)
      if (p->trainable()) p->zero_grad();
  }

  ConvEncoder<Real>& encoder() { return encoder_; }
  RspHead<Real>* rsp_head() { return rsp_head_.get(); }
  ProjectionHead<Real>* projection_head() { return proj_head_.get(); }

  template <typename Fn>
  void visit_params(Fn&& fn) {
    encoder_.visit_params(fn);
    fn("primary.head.weight", primary_head_.weight);
    fn("primary.head.bias", primary_head_.bias);
    if (rsp_head_) rsp_head_->visit_params(fn);
    if (proj_head_) proj_head_->visit_params(fn);
  }

 private:
  void require_task(TaskKind t) const {
    if (cfg_.task != t)
      throw std::invalid_argument(std::string("model was built for task ") + task_name(cfg_.task) +
                                  ", requested " + task_name(t));
  }

  void init_params() {
    encoder_.init(derive_seed(cfg_.seed, "init.encoder"));
    Rng rp(derive_seed(cfg_.seed, "init.primary"));
    primary_head_.init(rp);
    if (rsp_head_) rsp_head_->init(derive_seed(cfg_.seed, "init.secondary"));
    if (proj_head_) proj_head_->init(derive_seed(cfg_.seed, "init.secondary"));
  }

  void register_params() {
    visit_params([this](const std::string& name, Param<Real>& p) {
      p.name = name;
      if (name.rfind("encoder.", 0) == 0) p.role = Role::encoder;
      else if (name.rfind("primary.", 0) == 0) p.role = Role::primary;
      else p.role = Role::secondary;
      params_.push_back(&p);
    });
  }

  ModelConfig cfg_;
  ConvEncoder<Real> encoder_;
  Linear<Real> primary_head_;
  std::unique_ptr<RspHead<Real>> rsp_head_;
  std::unique_ptr<ProjectionHead<Real>> proj_head_;
  std::vector<Param<Real>*> params_;
};

/// The spec-level constructor: validates the config and returns a
/// deterministically initialized model.
template <typename Real = float>
std::unique_ptr<ModelBundle<Real>> build_model(const ModelConfig& cfg) {
  return std::make_unique<ModelBundle<Real>>(cfg);
}

}  // namespace tta
