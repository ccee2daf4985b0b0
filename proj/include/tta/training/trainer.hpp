#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "tta/core/errors.hpp"
#include "tta/data/dataset.hpp"
#include "tta/model/bundle.hpp"
#include "tta/nn/optim.hpp"
#include "tta/tasks/augment.hpp"
#include "tta/tasks/rsp.hpp"
#include "tta/training/config.hpp"
#include "tta/training/metrics.hpp"

namespace tta {

// ---------------------------------------------------------------------------
// Batch assembly. All randomness is keyed on (seed, stream, step, example),
// so the vanilla mode consuming no secondary draws cannot shift the primary
// ones, and batch content is independent of execution interleaving.
// ---------------------------------------------------------------------------

struct JointBatch {
  Tensor<float> primary;        // (N, S, S, 3)
  std::vector<int> labels;      // N
  Tensor<float> rsp;            // (3N, S, S, 3), example-major displayed order
  std::vector<int> rsp_labels;  // N
  Tensor<float> views;          // (2N, S, S, 3): all a-views then all b-views
};

/// Primary augmentations are drawn once per example and replayed on every
/// pyramid level, then the secondary-task construction (permutation or the
/// two SimCLR views) happens on top. That ordering is part of the contract
/// and is visible in the op log.
inline JointBatch build_joint_batch(const std::vector<const PatchRecord*>& records, TaskKind task,
                                    const AugmentationConfig& aug, std::uint64_t seed, long step,
                                    bool build_secondary, AugLog* log = nullptr) {
  const int n = static_cast<int>(records.size());
  JointBatch out;
  out.labels.reserve(static_cast<size_t>(n));

  std::vector<Image> primary_images(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (log) {
      log->example = i;
      log->stage = "primary";
    }
    Rng rng(derive_seed(seed, "aug-primary", step, i));
    primary_images[static_cast<size_t>(i)] =
        augment_primary(records[static_cast<size_t>(i)]->pyramid.patches[0], aug.primary, rng, log);
    out.labels.push_back(records[static_cast<size_t>(i)]->label);
  }
  {
    std::vector<const Image*> ptrs;
    for (const auto& im : primary_images) ptrs.push_back(&im);
    out.primary = stack(ptrs);
  }
  if (!build_secondary) return out;

  if (task == TaskKind::rsp) {
    std::vector<Image> ordered(static_cast<size_t>(3 * n));
    out.rsp_labels.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      if (log) {
        log->example = i;
        log->stage = "secondary";
      }
      // replay the example's primary augmentation on each pyramid level
      std::array<Image, 3> levels;
      for (int level = 0; level < 3; ++level) {
        Rng rng(derive_seed(seed, "aug-primary", step, i));
        levels[static_cast<size_t>(level)] = augment_primary(
            records[static_cast<size_t>(i)]->pyramid.patches[static_cast<size_t>(level)], aug.primary,
            rng, level == 0 ? nullptr : log);
      }
      Rng perm_rng(derive_seed(seed, "rsp-perm", step, i));
      const int label = perm_rng.uniform_int(6);
      if (log) log->record("rsp_permutation", label);
      const auto order = order_of_label(label);
      out.rsp_labels.push_back(label);
      for (int p = 0; p < 3; ++p)
        ordered[static_cast<size_t>(3 * i + p)] = levels[static_cast<size_t>(order[static_cast<size_t>(p)])];
    }
    std::vector<const Image*> ptrs;
    for (const auto& im : ordered) ptrs.push_back(&im);
    out.rsp = stack(ptrs);
  } else {
    std::vector<Image> va(static_cast<size_t>(n)), vb(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      if (log) {
        log->example = i;
        log->stage = "secondary";
      }
      Rng ra(derive_seed(seed, "simclr-view", step, i, 0));
      Rng rb(derive_seed(seed, "simclr-view", step, i, 1));
      va[static_cast<size_t>(i)] = augment_simclr(primary_images[static_cast<size_t>(i)], aug.simclr, ra, log);
      vb[static_cast<size_t>(i)] = augment_simclr(primary_images[static_cast<size_t>(i)], aug.simclr, rb, log);
    }
    std::vector<const Image*> ptrs;
    for (const auto& im : va) ptrs.push_back(&im);
    for (const auto& im : vb) ptrs.push_back(&im);
    out.views = stack(ptrs);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation (eval-mode BN, no parameter or statistic updates)
// ---------------------------------------------------------------------------

struct EvalStats {
  double primary_loss = 0, primary_acc = 0;
  double secondary_loss = 0, secondary_acc = 0;
  bool has_secondary = false, has_secondary_acc = false;
  int batches_evaluated = 0;
};

inline EvalStats evaluate_split(ModelBundle<float>& model, const std::vector<PatchRecord>& records,
                                const AugmentationConfig& aug, int n_batches, int batch_size,
                                std::uint64_t seed, bool with_secondary) {
  StratifiedBatcher batcher(records, batch_size, derive_seed(seed, "val-batches"));
  EvalStats s;
  for (int k = 0; k < n_batches; ++k) {
    ++s.batches_evaluated;
    const auto batch = batcher.next();
    std::vector<const Image*> ptrs;
    std::vector<int> labels;
    for (const auto* r : batch) {
      ptrs.push_back(&r->pyramid.patches[0]);
      labels.push_back(r->label);
    }
    const Tensor<float> images = stack(ptrs);
    const Tensor<float> logits = model.predict_primary(model.encode(images, BnMode::eval()));
    s.primary_loss += cross_entropy(logits, labels);
    s.primary_acc += accuracy(logits, labels);

    if (with_secondary && model.task() == TaskKind::rsp) {
      std::vector<Image> ordered(batch.size() * 3);
      std::vector<int> rsp_labels;
      for (size_t i = 0; i < batch.size(); ++i) {
        Rng rng(derive_seed(seed, "val-rsp", k, i));
        const int label = rng.uniform_int(6);
        rsp_labels.push_back(label);
        const auto order = order_of_label(label);
        for (int p = 0; p < 3; ++p)
          ordered[3 * i + static_cast<size_t>(p)] =
              batch[i]->pyramid.patches[static_cast<size_t>(order[static_cast<size_t>(p)])];
      }
      std::vector<const Image*> rptrs;
      for (const auto& im : ordered) rptrs.push_back(&im);
      const Tensor<float> latents = model.encode(stack(rptrs), BnMode::eval());
      const Tensor<float> rsp_logits = model.forward_rsp(latents);
      s.secondary_loss += rsp_loss(rsp_logits, rsp_labels);
      s.secondary_acc += accuracy(rsp_logits, rsp_labels);
      s.has_secondary = s.has_secondary_acc = true;
    } else if (with_secondary && model.task() == TaskKind::simclr) {
      std::vector<Image> bases;
      for (const auto* r : batch) bases.push_back(r->pyramid.patches[0]);
      auto [va, vb] = make_simclr_views(bases, aug.simclr, derive_seed(seed, "val-simclr", k));
      std::vector<const Image*> vptrs;
      for (const auto& im : va) vptrs.push_back(&im);
      for (const auto& im : vb) vptrs.push_back(&im);
      const Tensor<float> latents = model.encode(stack(vptrs), BnMode::eval());
      const Tensor<float> proj = model.forward_projection(latents);
      s.secondary_loss += nt_xent(proj, kSimclrTemperature);
      s.has_secondary = true;
    }
  }
  s.primary_loss /= n_batches;
  s.primary_acc /= n_batches;
  if (s.has_secondary) {
    s.secondary_loss /= n_batches;
    s.secondary_acc /= n_batches;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainOutcome {
  ParamSnapshot<float> best_snapshot;   // at the minimum validation objective
  long best_step = -1;
  double best_val_objective = std::numeric_limits<double>::infinity();
  double best_val_primary = std::numeric_limits<double>::quiet_NaN();
  double assoc_val_secondary = std::numeric_limits<double>::quiet_NaN();
  ParamSnapshot<float> final_snapshot;
  long steps_run = 0;
};

/// Joint / vanilla / pretrain / finetune training loop.
///
/// Per step: one stratified batch; primary augmentations; primary loss;
/// secondary inputs built from the same base batch; one optimizer update on
/// the combined loss over the mode's parameter set. Validation and logging
/// every log_period steps (plus step 0); the best checkpoint minimizes the
/// validation objective (primary loss, or secondary loss when pretraining).
///
/// Running BN statistics are refreshed only by the mode's lead forward
/// (primary pass in joint/vanilla/finetune, secondary pass in pretraining),
/// so a lambda_s=0 joint run stays bit-identical to a vanilla run.
inline TrainOutcome train(ModelBundle<float>& model, const std::vector<PatchRecord>& train_records,
                          const std::vector<PatchRecord>& val_records, const TrainingConfig& cfg,
                          const AugmentationConfig& aug, std::uint64_t seed, MetricLog& log) {
  cfg.validate();
  if (cfg.mode == TrainMode::vanilla && cfg.lambda_s != 0.0)
    throw UsageError("training: vanilla mode requires lambda_s = 0");

  const TaskKind task = model.task();
  const bool secondary_in_loss =
      cfg.mode == TrainMode::joint || cfg.mode == TrainMode::pretrain_secondary;
  const bool primary_in_loss = cfg.mode != TrainMode::pretrain_secondary;
  const bool log_secondary_val = task == TaskKind::rsp || task == TaskKind::simclr;

  std::vector<Param<float>*> opt_params;
  switch (cfg.mode) {
    case TrainMode::joint:
    case TrainMode::vanilla:
      opt_params = model.trainable_params();
      break;
    case TrainMode::pretrain_secondary:
      opt_params = model.partition({"encoder", "secondary"});
      break;
    case TrainMode::finetune_primary:
      opt_params = model.partition({"encoder", "primary"});
      break;
  }
  Adam<float> opt(opt_params);

  StratifiedBatcher batcher(train_records, cfg.batch_size, derive_seed(seed, "batches"));

  TrainOutcome out;
  const auto validate_and_log = [&](long logged_step, double train_p, double train_p_acc, double train_s,
                                    bool have_train) {
    if (have_train && primary_in_loss) {
      log.add(logged_step, "train", "primary", "loss", train_p);
      log.add(logged_step, "train", "primary", "accuracy", train_p_acc);
    }
    if (have_train && secondary_in_loss && cfg.mode != TrainMode::vanilla)
      log.add(logged_step, "train", "secondary", "loss", train_s);

    EvalStats vs = evaluate_split(model, val_records, aug, cfg.val_steps, cfg.batch_size,
                                  derive_seed(seed, "val", logged_step), log_secondary_val);
    log.add(logged_step, "val", "run", "batches", vs.batches_evaluated);
    double objective = vs.primary_loss;
    if (cfg.mode != TrainMode::pretrain_secondary) {
      log.add(logged_step, "val", "primary", "loss", vs.primary_loss);
      log.add(logged_step, "val", "primary", "accuracy", vs.primary_acc);
    }
    if (vs.has_secondary) {
      log.add(logged_step, "val", "secondary", "loss", vs.secondary_loss);
      if (vs.has_secondary_acc) log.add(logged_step, "val", "secondary", "accuracy", vs.secondary_acc);
      if (cfg.mode == TrainMode::pretrain_secondary) objective = vs.secondary_loss;
    }
    if (objective < out.best_val_objective) {
      out.best_val_objective = objective;
      out.best_val_primary = vs.primary_loss;
      out.assoc_val_secondary = vs.has_secondary ? vs.secondary_loss : std::numeric_limits<double>::quiet_NaN();
      out.best_step = logged_step;
      out.best_snapshot = model.snapshot();
    }
  };

  validate_and_log(0, 0, 0, 0, false);

  for (long s = 0; s < cfg.steps; ++s) {
    const auto batch_records = batcher.next();
    const JointBatch batch = build_joint_batch(batch_records, task, aug, seed, s, secondary_in_loss);
    opt.zero_grad();

    const double w_primary = cfg.mode == TrainMode::joint ? (1.0 - cfg.lambda_s)
                             : primary_in_loss            ? 1.0
                                                          : 0.0;
    const double w_secondary = cfg.mode == TrainMode::joint              ? cfg.lambda_s
                               : cfg.mode == TrainMode::pretrain_secondary ? 1.0
                                                                           : 0.0;

    double lp = 0.0, lp_acc = 0.0;
    if (primary_in_loss) {
      auto path = model.forward_primary_path(batch.primary, BnMode::train());
      Tensor<float> dlogits;
      lp = cross_entropy(path.logits, batch.labels, &dlogits);
      lp_acc = accuracy(path.logits, batch.labels);
      for (auto& g : dlogits.v) g *= static_cast<float>(w_primary);
      model.backward_primary_path(dlogits, path);
    }

    double ls = 0.0;
    if (secondary_in_loss) {
      const BnMode mode = cfg.mode == TrainMode::pretrain_secondary ? BnMode::train() : BnMode::train_no_update();
      if (task == TaskKind::rsp) {
        auto path = model.forward_rsp_path(batch.rsp, mode);
        Tensor<float> dlogits;
        ls = rsp_loss(path.logits, batch.rsp_labels, &dlogits);
        for (auto& g : dlogits.v) g *= static_cast<float>(w_secondary);
        model.backward_rsp_path(dlogits, path);
      } else {
        auto path = model.forward_projection_path(batch.views, mode);
        Tensor<float> dproj;
        ls = nt_xent(path.projections, kSimclrTemperature, &dproj);
        for (auto& g : dproj.v) g *= static_cast<float>(w_secondary);
        model.backward_projection_path(dproj, path);
      }
    }

    if (!std::isfinite(lp) || !std::isfinite(ls)) {
      log.add_diagnostic(s + 1, "diverged");
      throw TrainingDiverged("training diverged at step " + std::to_string(s + 1), static_cast<int>(s + 1));
    }
    if (cfg.mode == TrainMode::joint) joint_loss(lp, ls, cfg.lambda_s);

    opt.step(lr_at(s, cfg));
    out.steps_run = s + 1;

    if ((s + 1) % cfg.log_period == 0) validate_and_log(s + 1, lp, lp_acc, ls, true);
  }

  out.final_snapshot = model.snapshot();
  if (out.best_step < 0) out.best_snapshot = out.final_snapshot;
  return out;
}

/// Secondary-task-only pretraining (primary head untouched).
inline TrainOutcome pretrain_secondary(ModelBundle<float>& model,
                                       const std::vector<PatchRecord>& train_records,
                                       const std::vector<PatchRecord>& val_records, TrainingConfig cfg,
                                       const AugmentationConfig& aug, std::uint64_t seed, MetricLog& log) {
  cfg.mode = TrainMode::pretrain_secondary;
  return train(model, train_records, val_records, cfg, aug, seed, log);
}

/// Primary-task fine-tuning; the secondary head is frozen but its validation
/// metrics are logged throughout.
inline TrainOutcome finetune_primary(ModelBundle<float>& model,
                                     const std::vector<PatchRecord>& train_records,
                                     const std::vector<PatchRecord>& val_records, TrainingConfig cfg,
                                     const AugmentationConfig& aug, std::uint64_t seed, MetricLog& log) {
  cfg.mode = TrainMode::finetune_primary;
  cfg.lambda_s = 0.0;
  return train(model, train_records, val_records, cfg, aug, seed, log);
}

}  // namespace tta
