#pragma once

#include <filesystem>

#include "tta/data/dataset.hpp"
#include "tta/harness/config.hpp"
#include "tta/model/bundle.hpp"
#include "tta/training/trainer.hpp"

// Shared desk-scale fixtures for the training / adaptation / harness suites.

namespace tta::testutil {

inline ModelConfig tiny_model(TaskKind task = TaskKind::rsp, int image_size = 16) {
  ModelConfig cfg;
  cfg.image_size = image_size;
  cfg.latent_dim = 8;
  cfg.channels = {4, 8};
  cfg.task = task;
  cfg.rsp_pair_hidden = 16;
  cfg.rsp_pair_out = 16;
  cfg.rsp_cls_hidden = 16;
  cfg.proj_hidden = 16;
  cfg.proj_dim = 8;
  cfg.seed = 7;
  return cfg;
}

inline DataConfig tiny_data(int patch_size = 16) {
  DataConfig cfg;
  cfg.n_slides = 5;
  cfg.slide_size = 256;
  cfg.cell_px = 64;
  cfg.patch_size = patch_size;
  cfg.patches_per_slide = 24;
  cfg.texture.octave_spacing = {24, 6, 2};
  cfg.texture.fine_spacing = 1;
  return cfg;
}

struct TinyWorld {
  std::vector<VirtualSlide> slides;
  std::vector<PatchRecord> train, val, test;
};

inline TinyWorld make_tiny_world(std::uint64_t seed = 7, int patch_size = 16, int per_slide = 24) {
  DataConfig cfg = tiny_data(patch_size);
  cfg.patches_per_slide = per_slide;
  TinyWorld w;
  w.slides = generate_synthetic_dataset(cfg, seed);
  for (size_t i = 0; i < w.slides.size(); ++i) {
    auto recs = sample_patches(w.slides[i], per_slide, patch_size, derive_seed(seed, "patches"));
    auto& dst = i < 3 ? w.train : (i == 3 ? w.val : w.test);
    std::move(recs.begin(), recs.end(), std::back_inserter(dst));
  }
  return w;
}

inline TrainingConfig fast_training(int steps, int batch_size = 6) {
  TrainingConfig cfg;
  cfg.steps = steps;
  cfg.batch_size = batch_size;
  cfg.log_period = 100;
  cfg.val_steps = 4;
  cfg.lambda_s = 0.01;
  return cfg;
}

inline AugmentationConfig mild_augment() {
  AugmentationConfig aug;
  aug.primary.jitter = 0.1;
  aug.primary.hflip_prob = 0.5;
  aug.primary.vflip_prob = 0.5;
  aug.simclr.jitter = 0.4;
  aug.simclr.crop_scale_min = 0.7;
  return aug;
}

inline ModelConfig fixture_model() {
  ModelConfig cfg = tiny_model(TaskKind::rsp);
  cfg.latent_dim = 16;
  cfg.channels = {8, 16};
  return cfg;
}

/// One small RSP model trained to confident accuracy on unaugmented patches
/// (so running BN statistics match the raw input distribution); built once
/// and copied per test.
class TrainedFixture {
 public:
  static const TrainedFixture& get() {
    static TrainedFixture fixture;
    return fixture;
  }

  const TinyWorld& world() const { return world_; }
  std::unique_ptr<ModelBundle<float>> fresh_model() const { return model_->clone(); }

 private:
  TrainedFixture() : world_(make_tiny_world(11)) {
    model_ = build_model<float>(fixture_model());
    MetricLog log;
    TrainingConfig cfg = fast_training(1500, 12);
    cfg.log_period = 500;
    AugmentationConfig aug;  // identity: no augmentation at all
    aug.primary.jitter = 0.0;
    aug.primary.hflip_prob = 0.0;
    aug.primary.vflip_prob = 0.0;
    train(*model_, world_.train, world_.val, cfg, aug, 3, log);
  }

  TinyWorld world_;
  std::unique_ptr<ModelBundle<float>> model_;
};

}  // namespace tta::testutil
