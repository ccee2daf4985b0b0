#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "tta/model/bundle.hpp"
#include "tta/nn/optim.hpp"
#include "tta/shifts/shift.hpp"
#include "tta/tasks/augment.hpp"
#include "tta/tasks/rsp.hpp"
#include "tta/training/metrics.hpp"

namespace tta {

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

struct AdaptConfig {
  enum class Method { none, ttt, adabn, tent, memo };
  enum class Granularity { batch, single };

  Method method = Method::ttt;
  double step_size = 1e-3;  // eta, swept at test time
  int n_steps = 1;
  Granularity granularity = Granularity::batch;
  int episode_size = 32;
  int memo_k = 8;
  bool tent_allow_single = false;   // Tent wants batches > 1; override with a warning
  bool ttt_update_bn_stats = false; // running stats during the TTT secondary forward
  std::uint64_t seed = 0;

  static const char* method_name(Method m) {
    switch (m) {
      case Method::none: return "none";
      case Method::ttt: return "ttt";
      case Method::adabn: return "adabn";
      case Method::tent: return "tent";
      case Method::memo: return "memo";
    }
    return "?";
  }

  static Method method_from_name(const std::string& s) {
    for (Method m : {Method::none, Method::ttt, Method::adabn, Method::tent, Method::memo})
      if (s == method_name(m)) return m;
    throw UsageError("unknown adaptation method: " + s);
  }

  void validate() const {
    if (step_size < 0) throw UsageError("adapt: step_size must be >= 0");
    if (n_steps < 1) throw UsageError("adapt: n_steps must be >= 1");
    if (episode_size < 1) throw UsageError("adapt: episode_size must be >= 1");
    if (memo_k < 1) throw UsageError("adapt: memo_k must be >= 1");
  }

  Json to_json() const {
    Json j;
    j["method"] = method_name(method);
    j["step_size"] = step_size;
    j["n_steps"] = n_steps;
    j["granularity"] = granularity == Granularity::batch ? "batch" : "single";
    j["episode_size"] = episode_size;
    j["memo_k"] = memo_k;
    j["tent_allow_single"] = tent_allow_single;
    j["ttt_update_bn_stats"] = ttt_update_bn_stats;
    return j;
  }
  static AdaptConfig from_json(const Json& j, const std::string& path) {
    StrictObject o(j, path);
    AdaptConfig c;
    c.method = method_from_name(o.get_or<std::string>("method", method_name(c.method)));
    c.step_size = o.get_or<double>("step_size", c.step_size);
    c.n_steps = o.get_or<int>("n_steps", c.n_steps);
    const std::string g = o.get_or<std::string>("granularity", "batch");
    if (g == "batch") c.granularity = Granularity::batch;
    else if (g == "single") c.granularity = Granularity::single;
    else throw UsageError("adapt: granularity must be batch or single");
    c.episode_size = o.get_or<int>("episode_size", c.episode_size);
    c.memo_k = o.get_or<int>("memo_k", c.memo_k);
    c.tent_allow_single = o.get_or<bool>("tent_allow_single", c.tent_allow_single);
    c.ttt_update_bn_stats = o.get_or<bool>("ttt_update_bn_stats", c.ttt_update_bn_stats);
    o.done();
    c.validate();
    return c;
  }
};

// ---------------------------------------------------------------------------
// Entropy
// ---------------------------------------------------------------------------

/// Shannon entropy in nats averaged over rows. Rows must be distributions
/// (non-negative, summing to one within 1e-5).
template <typename Real>
Real entropy(const Tensor<Real>& probs) {
  if (probs.ndim() != 2) throw std::invalid_argument("entropy: probs must be (N, C)");
  const int n = probs.dim(0), c = probs.dim(1);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    double h = 0.0;
    for (int k = 0; k < c; ++k) {
      const double p = static_cast<double>(probs[static_cast<std::int64_t>(i) * c + k]);
      if (p < 0) throw std::invalid_argument("entropy: negative probability");
      sum += p;
      if (p > 0) h -= p * std::log(p);
    }
    if (std::abs(sum - 1.0) > 1e-5) throw std::invalid_argument("entropy: row does not sum to 1");
    total += h;
  }
  return static_cast<Real>(total / n);
}

/// Marginal output distribution of a logit batch: the mean softmax row, in
/// double precision. For identical rows the mean is exact (bit-equal to the
/// row's own softmax promoted to double).
template <typename Real>
std::vector<double> marginal_distribution(const Tensor<Real>& logits) {
  const int n = logits.dim(0), c = logits.dim(1);
  const Tensor<Real> probs = softmax_rows(logits);
  std::vector<double> marginal(static_cast<size_t>(c), 0.0);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < c; ++j)
      marginal[static_cast<size_t>(j)] += static_cast<double>(probs[static_cast<std::int64_t>(k) * c + j]);
  for (auto& m : marginal) m /= n;
  return marginal;
}

inline double entropy_of_distribution(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0) h -= v * std::log(v);
  return h;
}

/// Mean prediction entropy of a logit batch and its gradient w.r.t. logits:
/// dH/dz = -p (log p + H) per row, averaged.
template <typename Real>
Real mean_entropy_of_logits(const Tensor<Real>& logits, Tensor<Real>* dlogits = nullptr) {
  const int n = logits.dim(0), c = logits.dim(1);
  const Tensor<Real> p = softmax_rows(logits);
  if (dlogits) *dlogits = Tensor<Real>(logits.shape);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double h = 0.0;
    for (int k = 0; k < c; ++k) {
      const double pk = static_cast<double>(p[static_cast<std::int64_t>(i) * c + k]);
      if (pk > 0) h -= pk * std::log(pk);
    }
    total += h;
    if (dlogits) {
      for (int k = 0; k < c; ++k) {
        const double pk = static_cast<double>(p[static_cast<std::int64_t>(i) * c + k]);
        const double g = pk > 0 ? -pk * (std::log(pk) + h) : 0.0;
        (*dlogits)[static_cast<std::int64_t>(i) * c + k] = static_cast<Real>(g / n);
      }
    }
  }
  return static_cast<Real>(total / n);
}

// ---------------------------------------------------------------------------
// Episodes
// ---------------------------------------------------------------------------

struct EpisodeAudit {
  std::string episode_id;
  std::string method;
  int n = 0;
  std::string pre_digest, post_digest;
  bool restored = false;
  bool aborted = false;
  /// Frozen-scope self-check, measured mid-episode before the restore: the
  /// method's untouchable parameter set is bitwise unchanged (primary head
  /// for TTT, non-affine for Tent, all trainables for AdaBN).
  bool scope_ok = false;
  double pre_loss = std::numeric_limits<double>::quiet_NaN();
  double post_loss = std::numeric_limits<double>::quiet_NaN();

  Json to_json() const {
    Json j;
    j["episode"] = episode_id;
    j["method"] = method;
    j["n"] = n;
    j["pre_digest"] = pre_digest;
    j["post_digest"] = post_digest;
    j["restored"] = restored;
    j["aborted"] = aborted;
    j["scope_ok"] = scope_ok;
    j["pre_loss"] = std::isfinite(pre_loss) ? Json(pre_loss) : Json(nullptr);
    j["post_loss"] = std::isfinite(post_loss) ? Json(post_loss) : Json(nullptr);
    return j;
  }
};

namespace detail {

inline Tensor<float> stack_primary(const std::vector<const PatchRecord*>& unit) {
  std::vector<const Image*> ptrs;
  for (const auto* r : unit) ptrs.push_back(&r->pyramid.patches[0]);
  return stack(ptrs);
}

inline std::uint64_t record_key_hash(const PatchRecord& r) {
  return std::hash<std::string>{}(r.key());
}

/// TTT inputs for one adaptation step, keyed on record identity.
inline Tensor<float> build_ttt_rsp_batch(const std::vector<const PatchRecord*>& unit,
                                         std::uint64_t seed, int step, std::vector<int>* labels) {
  std::vector<Image> ordered(unit.size() * 3);
  labels->clear();
  for (size_t i = 0; i < unit.size(); ++i) {
    Rng rng(derive_seed(seed, "ttt-rsp", record_key_hash(*unit[i]), step));
    const int label = rng.uniform_int(6);
    labels->push_back(label);
    const auto order = order_of_label(label);
    for (int p = 0; p < 3; ++p)
      ordered[3 * i + static_cast<size_t>(p)] =
          unit[i]->pyramid.patches[static_cast<size_t>(order[static_cast<size_t>(p)])];
  }
  std::vector<const Image*> ptrs;
  for (const auto& im : ordered) ptrs.push_back(&im);
  return stack(ptrs);
}

inline Tensor<float> build_ttt_views(const std::vector<const PatchRecord*>& unit,
                                     const SimclrAugConfig& aug, std::uint64_t seed, int step) {
  std::vector<Image> views(unit.size() * 2);
  for (size_t i = 0; i < unit.size(); ++i)
    for (int v = 0; v < 2; ++v) {
      Rng rng(derive_seed(seed, "ttt-view", record_key_hash(*unit[i]), step, v));
      views[static_cast<size_t>(v) * unit.size() + i] =
          augment_simclr(unit[i]->pyramid.patches[0], aug, rng);
    }
  std::vector<const Image*> ptrs;
  for (const auto& im : views) ptrs.push_back(&im);
  return stack(ptrs);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// TTT: episodic gradient descent on the secondary loss over encoder +
// secondary head; the primary head cannot move. Snapshot before, restore
// after, so inference order can never matter.
// ---------------------------------------------------------------------------

inline Tensor<float> ttt_adapt(ModelBundle<float>& model, const std::vector<const PatchRecord*>& unit,
                               TaskKind task, const AdaptConfig& cfg, const SimclrAugConfig& view_aug,
                               EpisodeAudit* audit = nullptr) {
  cfg.validate();
  if (unit.empty()) throw std::invalid_argument("ttt_adapt: empty unit");
  if (task != model.task())
    throw std::invalid_argument(std::string("ttt_adapt: model trained for ") + task_name(model.task()) +
                                ", episode requested " + task_name(task));

  const ParamSnapshot<float> snap = model.snapshot();
  if (audit) {
    audit->method = "ttt";
    audit->n = static_cast<int>(unit.size());
    Digest d;
    d.update_pod(snap.digest);
    audit->pre_digest = d.hex();
  }
  const std::uint64_t primary_digest_pre = model.digest_of(model.partition({"primary"}));
  const auto params = model.partition({"encoder", "secondary"});
  const BnMode loss_mode = cfg.ttt_update_bn_stats ? BnMode::train() : BnMode::train_no_update();

  bool aborted = false;
  double pre_loss = std::numeric_limits<double>::quiet_NaN();
  std::vector<int> labels0;
  Tensor<float> inputs0;  // step-0 inputs, reused for the post-adaptation loss

  for (int s = 0; s < cfg.n_steps && !aborted; ++s) {
    model.zero_grad();
    double loss = 0.0;
    if (task == TaskKind::rsp) {
      std::vector<int> labels;
      Tensor<float> batch = detail::build_ttt_rsp_batch(unit, cfg.seed, s, &labels);
      auto path = model.forward_rsp_path(batch, loss_mode);
      Tensor<float> dlogits;
      loss = rsp_loss(path.logits, labels, &dlogits);
      if (std::isfinite(loss)) model.backward_rsp_path(dlogits, path);
      if (s == 0) {
        labels0 = labels;
        inputs0 = std::move(batch);
      }
    } else {
      Tensor<float> views = detail::build_ttt_views(unit, view_aug, cfg.seed, s);
      auto path = model.forward_projection_path(views, loss_mode);
      Tensor<float> dproj;
      loss = nt_xent(path.projections, kSimclrTemperature, &dproj);
      if (std::isfinite(loss)) model.backward_projection_path(dproj, path);
      if (s == 0) inputs0 = std::move(views);
    }
    if (s == 0) pre_loss = loss;
    if (!std::isfinite(loss)) {
      aborted = true;
      break;
    }
    sgd_step(params, cfg.step_size);
  }

  double post_loss = std::numeric_limits<double>::quiet_NaN();
  if (aborted) {
    model.restore(snap);  // unadapted predictions below
  } else {
    if (task == TaskKind::rsp) {
      auto path = model.forward_rsp_path(inputs0, BnMode::train_no_update());
      post_loss = rsp_loss(path.logits, labels0);
    } else {
      auto path = model.forward_projection_path(inputs0, BnMode::train_no_update());
      post_loss = nt_xent(path.projections, kSimclrTemperature);
    }
  }

  Tensor<float> logits = model.infer_logits(detail::stack_primary(unit));
  const bool scope_ok = model.digest_of(model.partition({"primary"})) == primary_digest_pre;
  model.restore(snap);
  if (audit) {
    Digest d;
    d.update_pod(model.digest());
    audit->post_digest = d.hex();
    audit->restored = model.digest() == snap.digest;
    audit->aborted = aborted;
    audit->scope_ok = scope_ok;
    audit->pre_loss = pre_loss;
    audit->post_loss = post_loss;
  }
  return logits;
}

// ---------------------------------------------------------------------------
// AdaBN: replace batch-norm running statistics with statistics of the test
// data. No trainable parameter changes.
// ---------------------------------------------------------------------------

/// Full-pass variant: returns an adapted copy, leaving the input model
/// untouched.
inline std::unique_ptr<ModelBundle<float>> adabn_adapt(const ModelBundle<float>& model,
                                                       const std::vector<PatchRecord>& test_data,
                                                       int batch_size = 64) {
  if (test_data.empty()) throw std::invalid_argument("adabn_adapt: empty test data");
  auto adapted = model.clone();
  adapted->encoder().begin_bn_collect();
  for (size_t start = 0; start < test_data.size(); start += static_cast<size_t>(batch_size)) {
    std::vector<const Image*> ptrs;
    for (size_t i = start; i < std::min(test_data.size(), start + static_cast<size_t>(batch_size)); ++i)
      ptrs.push_back(&test_data[i].pyramid.patches[0]);
    adapted->encode(stack(ptrs), BnMode::train_no_update());
  }
  adapted->encoder().finish_bn_collect();
  return adapted;
}

/// Episodic in-place variant used by the evaluation loop.
inline Tensor<float> adabn_episode(ModelBundle<float>& model, const std::vector<const PatchRecord*>& unit,
                                   EpisodeAudit* audit = nullptr) {
  const ParamSnapshot<float> snap = model.snapshot();
  if (audit) {
    audit->method = "adabn";
    audit->n = static_cast<int>(unit.size());
    Digest d;
    d.update_pod(snap.digest);
    audit->pre_digest = d.hex();
  }
  const std::uint64_t trainable_pre = model.digest_of(model.trainable_params());
  Tensor<float> images = detail::stack_primary(unit);
  model.encoder().begin_bn_collect();
  model.encode(images, BnMode::train_no_update());
  model.encoder().finish_bn_collect();
  Tensor<float> logits = model.infer_logits(images);
  const bool scope_ok = model.digest_of(model.trainable_params()) == trainable_pre;
  model.restore(snap);
  if (audit) {
    Digest d;
    d.update_pod(model.digest());
    audit->post_digest = d.hex();
    audit->restored = model.digest() == snap.digest;
    audit->scope_ok = scope_ok;
  }
  return logits;
}

// ---------------------------------------------------------------------------
// Tent: minimize mean prediction entropy by updating only the BN affine
// parameters. Running statistics are used for normalization so eta = 0 is
// exactly the unadapted model.
// ---------------------------------------------------------------------------

inline Tensor<float> tent_adapt(ModelBundle<float>& model, const std::vector<const PatchRecord*>& unit,
                                const AdaptConfig& cfg, EpisodeAudit* audit = nullptr) {
  cfg.validate();
  if (unit.empty()) throw std::invalid_argument("tent_adapt: empty unit");
  if (unit.size() == 1 && !cfg.tent_allow_single)
    throw std::invalid_argument("tent_adapt: unit size must be greater than one (set tent_allow_single to override)");

  const ParamSnapshot<float> snap = model.snapshot();
  if (audit) {
    audit->method = "tent";
    audit->n = static_cast<int>(unit.size());
    Digest d;
    d.update_pod(snap.digest);
    audit->pre_digest = d.hex();
  }
  const auto affine = model.partition({"affine"});
  std::vector<Param<float>*> non_affine;
  for (auto* p : model.params())
    if (!p->affine) non_affine.push_back(p);
  const std::uint64_t non_affine_pre = model.digest_of(non_affine);
  const Tensor<float> images = detail::stack_primary(unit);

  bool aborted = false;
  double pre_loss = std::numeric_limits<double>::quiet_NaN();
  double post_loss = std::numeric_limits<double>::quiet_NaN();
  for (int s = 0; s < cfg.n_steps; ++s) {
    model.zero_grad();
    auto path = model.forward_primary_path(images, BnMode::eval());
    Tensor<float> dlogits;
    const double h = mean_entropy_of_logits(path.logits, &dlogits);
    if (s == 0) pre_loss = h;
    if (!std::isfinite(h)) {
      aborted = true;
      break;
    }
    model.backward_primary_path(dlogits, path);
    sgd_step(affine, cfg.step_size);
  }
  if (aborted) {
    model.restore(snap);
  } else {
    post_loss = static_cast<double>(mean_entropy_of_logits<float>(model.infer_logits(images), nullptr));
  }
  Tensor<float> logits = model.infer_logits(images);
  const bool scope_ok = model.digest_of(non_affine) == non_affine_pre;
  model.restore(snap);
  if (audit) {
    Digest d;
    d.update_pod(model.digest());
    audit->post_digest = d.hex();
    audit->restored = model.digest() == snap.digest;
    audit->aborted = aborted;
    audit->scope_ok = scope_ok;
    audit->pre_loss = pre_loss;
    audit->post_loss = post_loss;
  }
  return logits;
}

// ---------------------------------------------------------------------------
// MEMO: single-sample entropy minimization over the marginal output
// distribution of augmented copies, updating all parameters.
// ---------------------------------------------------------------------------

inline Tensor<float> memo_adapt(ModelBundle<float>& model, const PatchRecord& sample,
                                const AdaptConfig& cfg, const SimclrAugConfig& aug,
                                EpisodeAudit* audit = nullptr) {
  cfg.validate();
  const ParamSnapshot<float> snap = model.snapshot();
  if (audit) {
    audit->method = "memo";
    audit->n = 1;
    Digest d;
    d.update_pod(snap.digest);
    audit->pre_digest = d.hex();
  }
  const auto params = model.trainable_params();
  const std::uint64_t key = detail::record_key_hash(sample);

  bool aborted = false;
  double pre_loss = std::numeric_limits<double>::quiet_NaN();
  double post_loss = std::numeric_limits<double>::quiet_NaN();
  Tensor<float> copies0;  // step-0 augmented copies, reused for the post loss
  for (int s = 0; s < cfg.n_steps; ++s) {
    std::vector<Image> copies(static_cast<size_t>(cfg.memo_k));
    for (int k = 0; k < cfg.memo_k; ++k) {
      Rng rng(derive_seed(cfg.seed, "memo-aug", key, s, k));
      copies[static_cast<size_t>(k)] = augment_simclr(sample.pyramid.patches[0], aug, rng);
    }
    std::vector<const Image*> ptrs;
    for (const auto& im : copies) ptrs.push_back(&im);
    const Tensor<float> batch = stack(ptrs);
    if (s == 0) copies0 = batch;

    model.zero_grad();
    auto path = model.forward_primary_path(batch, BnMode::eval());
    const int kk = cfg.memo_k, c = path.logits.dim(1);
    const Tensor<float> probs = softmax_rows(path.logits);
    const std::vector<double> marginal = marginal_distribution(path.logits);
    const double h = entropy_of_distribution(marginal);
    if (s == 0) pre_loss = h;
    if (!std::isfinite(h)) {
      aborted = true;
      break;
    }

    // dL/dz_k = (1/K) J_softmax(z_k)^T u with u_j = -(log marginal_j + 1)
    std::vector<double> u(static_cast<size_t>(c));
    for (int j = 0; j < c; ++j)
      u[static_cast<size_t>(j)] = marginal[static_cast<size_t>(j)] > 0
                                      ? -(std::log(marginal[static_cast<size_t>(j)]) + 1.0)
                                      : 0.0;
    Tensor<float> dlogits(path.logits.shape);
    for (int k = 0; k < kk; ++k) {
      double dot = 0.0;
      for (int j = 0; j < c; ++j)
        dot += static_cast<double>(probs[static_cast<std::int64_t>(k) * c + j]) * u[static_cast<size_t>(j)];
      for (int j = 0; j < c; ++j) {
        const double pj = static_cast<double>(probs[static_cast<std::int64_t>(k) * c + j]);
        dlogits[static_cast<std::int64_t>(k) * c + j] = static_cast<float>(pj * (u[static_cast<size_t>(j)] - dot) / kk);
      }
    }
    model.backward_primary_path(dlogits, path);
    sgd_step(params, cfg.step_size);
  }

  if (aborted) model.restore(snap);

  std::vector<const Image*> one = {&sample.pyramid.patches[0]};
  Tensor<float> logits = model.infer_logits(stack(one));
  if (!aborted) {
    // post-adaptation marginal entropy over the step-0 copies
    auto path = model.forward_primary_path(copies0, BnMode::eval());
    post_loss = entropy_of_distribution(marginal_distribution(path.logits));
  }
  model.restore(snap);
  if (audit) {
    Digest d;
    d.update_pod(model.digest());
    audit->post_digest = d.hex();
    audit->restored = model.digest() == snap.digest;
    audit->aborted = aborted;
    audit->scope_ok = true;  // no frozen complement: MEMO may change all parameters
    audit->pre_loss = pre_loss;
    audit->post_loss = post_loss;
  }
  return logits;
}

// ---------------------------------------------------------------------------
// Evaluation loop
// ---------------------------------------------------------------------------

struct AdaptEvalResult {
  double accuracy = 0;
  double primary_loss = 0;
  std::vector<int> predictions;  // original input order
  Tensor<float> logits;          // (n, 3), original input order
  std::vector<EpisodeAudit> episodes;
};

/// Apply the shift, partition into episodes, run the method per episode with
/// snapshot/restore, aggregate. Episode membership is a function of record
/// identity (sorted by key), never of input order; per-episode failures are
/// flagged in the audit log, not raised.
inline AdaptEvalResult evaluate_with_adaptation(ModelBundle<float>& model,
                                                const std::vector<PatchRecord>& test_set,
                                                const ShiftSpec& shift, const AdaptConfig& cfg,
                                                const AugmentationConfig& aug, std::uint64_t seed) {
  cfg.validate();
  if (test_set.empty()) throw std::invalid_argument("evaluate_with_adaptation: empty test set");
  if (cfg.method == AdaptConfig::Method::tent && cfg.granularity == AdaptConfig::Granularity::single &&
      !cfg.tent_allow_single)
    throw std::invalid_argument("tent at single-sample granularity requires tent_allow_single");

  const std::vector<PatchRecord> shifted = shift_dataset(test_set, shift, derive_seed(seed, "shift"));

  // order-invariant episode assignment
  std::vector<size_t> order(shifted.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return shifted[a].key() < shifted[b].key(); });
  const size_t episode_size =
      cfg.granularity == AdaptConfig::Granularity::single ? 1 : static_cast<size_t>(cfg.episode_size);

  AdaptEvalResult out;
  out.predictions.assign(shifted.size(), -1);
  out.logits = Tensor<float>({static_cast<int>(shifted.size()), 3});

  AdaptConfig episode_cfg = cfg;
  episode_cfg.seed = derive_seed(seed, "episodes", cfg.seed);

  for (size_t start = 0; start < order.size(); start += episode_size) {
    const size_t end = std::min(order.size(), start + episode_size);
    std::vector<const PatchRecord*> unit;
    for (size_t i = start; i < end; ++i) unit.push_back(&shifted[order[i]]);

    EpisodeAudit audit;
    audit.episode_id = unit.front()->key();
    Tensor<float> logits;
    switch (cfg.method) {
      case AdaptConfig::Method::none: {
        const ParamSnapshot<float> snap = model.snapshot();
        Digest d;
        d.update_pod(snap.digest);
        audit.method = "none";
        audit.n = static_cast<int>(unit.size());
        audit.pre_digest = audit.post_digest = d.hex();
        audit.restored = true;
        audit.scope_ok = true;
        logits = model.infer_logits(detail::stack_primary(unit));
        break;
      }
      case AdaptConfig::Method::ttt:
        logits = ttt_adapt(model, unit, model.task(), episode_cfg, aug.simclr, &audit);
        break;
      case AdaptConfig::Method::adabn:
        logits = adabn_episode(model, unit, &audit);
        break;
      case AdaptConfig::Method::tent:
        logits = tent_adapt(model, unit, episode_cfg, &audit);
        break;
      case AdaptConfig::Method::memo: {
        // MEMO is defined per sample; within a batch episode it runs
        // sample-by-sample, each with its own snapshot/restore.
        logits = Tensor<float>({static_cast<int>(unit.size()), 3});
        audit.method = "memo";
        audit.n = static_cast<int>(unit.size());
        {
          Digest d;
          d.update_pod(model.digest());
          audit.pre_digest = d.hex();
        }
        audit.restored = true;
        audit.scope_ok = true;
        for (size_t i = 0; i < unit.size(); ++i) {
          EpisodeAudit sub;
          Tensor<float> l = memo_adapt(model, *unit[i], episode_cfg, aug.simclr, &sub);
          audit.restored = audit.restored && sub.restored;
          audit.scope_ok = audit.scope_ok && sub.scope_ok;
          audit.aborted = audit.aborted || sub.aborted;
          if (i == 0) {
            audit.pre_loss = sub.pre_loss;
            audit.post_loss = sub.post_loss;
          }
          for (int c = 0; c < 3; ++c)
            logits[static_cast<std::int64_t>(i) * 3 + c] = l[c];
        }
        {
          Digest d;
          d.update_pod(model.digest());
          audit.post_digest = d.hex();
        }
        break;
      }
    }

    for (size_t i = start; i < end; ++i) {
      const size_t rec = order[i];
      const std::int64_t row = static_cast<std::int64_t>(i - start);
      int best = 0;
      for (int c = 1; c < 3; ++c)
        if (logits[row * 3 + c] > logits[row * 3 + best]) best = c;
      out.predictions[rec] = best;
      for (int c = 0; c < 3; ++c)
        out.logits[static_cast<std::int64_t>(rec) * 3 + c] = logits[row * 3 + c];
    }
    out.episodes.push_back(std::move(audit));
  }

  std::vector<int> labels;
  for (const auto& r : shifted) labels.push_back(r.label);
  out.primary_loss = cross_entropy(out.logits, labels);
  out.accuracy = accuracy(out.logits, labels);
  return out;
}

}  // namespace tta
