#include <gtest/gtest.h>

#include "tta/model/bundle.hpp"
#include "tta/model/checkpoint.hpp"
#include "tta/nn/optim.hpp"
#include "tta/tasks/losses.hpp"

using namespace tta;

namespace {

ModelConfig tiny_config(TaskKind task = TaskKind::rsp) {
  ModelConfig cfg;
  cfg.image_size = 16;
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

Tensor<float> random_images(int n, int size, std::uint64_t seed) {
  Tensor<float> t({n, size, size, 3});
  Rng rng(seed);
  for (auto& v : t.v) v = static_cast<float>(rng.uniform());
  return t;
}

}  // namespace

TEST(BuildModel, DeterministicInitSameSeed) {
  auto a = build_model<float>(tiny_config());
  auto b = build_model<float>(tiny_config());
  EXPECT_EQ(a->snapshot().digest, b->snapshot().digest);
  ModelConfig other = tiny_config();
  other.seed = 8;
  EXPECT_NE(build_model<float>(other)->snapshot().digest, a->snapshot().digest);
}

TEST(BuildModel, RejectsBadConfig) {
  ModelConfig cfg = tiny_config();
  cfg.latent_dim = 0;
  EXPECT_THROW(build_model<float>(cfg), UsageError);
  cfg = tiny_config();
  cfg.image_size = 2;  // below the 2^blocks minimum
  EXPECT_THROW(build_model<float>(cfg), UsageError);
}

TEST(BuildModel, AcceptsFullScaleInput) {
  // 526x526x3 with latent 512 must work even though 526 is not a multiple of
  // the encoder's downsampling factor (ceil-mode pooling).
  ModelConfig cfg;
  cfg.image_size = 526;
  cfg.latent_dim = 512;
  cfg.channels = {4, 4, 8, 8};  // thin blocks keep this quick
  cfg.seed = 1;
  auto model = build_model<float>(cfg);
  const auto latents = model->encode(random_images(1, 526, 2));
  EXPECT_EQ(latents.dim(0), 1);
  EXPECT_EQ(latents.dim(1), 512);
  EXPECT_TRUE(all_finite(latents));
}

TEST(BuildModel, EncoderHasAtLeastTwoBnLayers) {
  auto model = build_model<float>(tiny_config());
  EXPECT_GE(model->encoder().n_bn_layers(), 2);
}

TEST(Encode, ShapeContractAndDeterminism) {
  auto model = build_model<float>(tiny_config());
  const auto batch = random_images(8, 16, 3);
  const auto latents = model->encode(batch, BnMode::eval());
  EXPECT_EQ(latents.dim(0), 8);
  EXPECT_EQ(latents.dim(1), 8);
  EXPECT_TRUE(all_finite(latents));

  // same image twice in one batch -> identical rows
  Tensor<float> dup({2, 16, 16, 3});
  std::copy(batch.v.begin(), batch.v.begin() + 16 * 16 * 3, dup.v.begin());
  std::copy(batch.v.begin(), batch.v.begin() + 16 * 16 * 3, dup.v.begin() + 16 * 16 * 3);
  const auto two = model->encode(dup, BnMode::eval());
  for (int k = 0; k < 8; ++k) EXPECT_EQ(two[k], two[8 + k]);

  // single-sample path works (patient-by-patient inference)
  const auto one = model->encode(random_images(1, 16, 4), BnMode::eval());
  EXPECT_EQ(one.dim(0), 1);

  // shape mismatch errors
  EXPECT_THROW(model->encode(random_images(1, 32, 5)), std::invalid_argument);
}

TEST(PredictPrimary, ThreeClassLogitsSoftmaxNormalized) {
  auto model = build_model<float>(tiny_config());
  const auto latents = model->encode(random_images(6, 16, 6), BnMode::eval());
  const auto logits = model->predict_primary(latents);
  EXPECT_EQ(logits.dim(1), 3);
  const auto probs = softmax_rows(logits);
  for (int i = 0; i < 6; ++i) {
    double s = 0;
    for (int c = 0; c < 3; ++c) s += probs[i * 3 + c];
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
  const auto again = model->predict_primary(latents);
  EXPECT_EQ(logits.v, again.v);
}

TEST(ForwardRsp, SixLogitsAndOrderSensitivity) {
  auto model = build_model<float>(tiny_config(TaskKind::rsp));
  EXPECT_EQ(model->rsp_head()->pair_input_width(), 2 * 8);

  Tensor<float> latents({3, 8});
  Rng rng(9);
  for (auto& v : latents.v) v = static_cast<float>(rng.normal());
  const auto logits = model->forward_rsp(latents);
  EXPECT_EQ(logits.dim(0), 1);
  EXPECT_EQ(logits.dim(1), 6);

  // permuting the three latents changes the logits
  Tensor<float> permuted({3, 8});
  for (int k = 0; k < 8; ++k) {
    permuted[0 * 8 + k] = latents[1 * 8 + k];
    permuted[1 * 8 + k] = latents[2 * 8 + k];
    permuted[2 * 8 + k] = latents[0 * 8 + k];
  }
  const auto plogits = model->forward_rsp(permuted);
  bool any_diff = false;
  for (int k = 0; k < 6; ++k) any_diff = any_diff || logits[k] != plogits[k];
  EXPECT_TRUE(any_diff);

  Tensor<float> bad({4, 8});
  EXPECT_THROW(model->forward_rsp(bad), std::invalid_argument);
  // wrong-task model
  auto simclr = build_model<float>(tiny_config(TaskKind::simclr));
  EXPECT_THROW(simclr->forward_rsp(latents), std::invalid_argument);
}

TEST(ForwardProjection, ShapeAndDeterminism) {
  ModelConfig cfg = tiny_config(TaskKind::simclr);
  auto model = build_model<float>(cfg);
  Tensor<float> latents({144, 8});
  Rng rng(10);
  for (auto& v : latents.v) v = static_cast<float>(rng.normal());
  const auto proj = model->forward_projection(latents);
  EXPECT_EQ(proj.dim(0), 144);
  EXPECT_EQ(proj.dim(1), cfg.proj_dim);
  EXPECT_EQ(model->forward_projection(latents).v, proj.v);
}

TEST(Snapshot, RoundTripIncludingBnStats) {
  auto model = build_model<float>(tiny_config());
  // move running stats away from init by one train-mode pass
  model->encode(random_images(4, 16, 11), BnMode::train());
  const auto snap = model->snapshot();

  // perturb every parameter and statistic
  for (auto* p : model->params())
    for (auto& v : p->value.v) v += 0.25f;
  EXPECT_NE(model->digest(), snap.digest);
  model->restore(snap);
  EXPECT_EQ(model->digest(), snap.digest);
  EXPECT_EQ(model->snapshot().digest, snap.digest);

  // targeted mutation of running stats only
  auto stats = model->partition({"bn_stats"});
  ASSERT_FALSE(stats.empty());
  stats[0]->value[0] += 1.0f;
  EXPECT_NE(model->digest(), snap.digest);
  model->restore(snap);
  EXPECT_EQ(model->digest(), snap.digest);
}

TEST(Snapshot, MismatchedArchitectureRejected) {
  auto a = build_model<float>(tiny_config());
  ModelConfig other = tiny_config();
  other.latent_dim = 12;
  auto b = build_model<float>(other);
  EXPECT_THROW(b->restore(a->snapshot()), std::invalid_argument);
}

TEST(Partition, RolesAreDisjointAndExhaustive) {
  auto model = build_model<float>(tiny_config());
  const auto enc = model->partition({"encoder"});
  const auto pri = model->partition({"primary"});
  const auto sec = model->partition({"secondary"});
  std::set<const Param<float>*> seen;
  for (const auto* p : enc) seen.insert(p);
  for (const auto* p : pri) seen.insert(p);
  for (const auto* p : sec) seen.insert(p);
  EXPECT_EQ(seen.size(), enc.size() + pri.size() + sec.size());  // disjoint
  EXPECT_EQ(seen.size(), model->trainable_params().size());      // exhaustive

  const auto affine = model->partition({"affine"});
  EXPECT_EQ(affine.size(), 2u * static_cast<size_t>(model->encoder().n_bn_layers()));
  for (const auto* p : affine) EXPECT_TRUE(p->affine);

  const auto ttt_set = model->partition({"encoder", "secondary"});
  EXPECT_EQ(ttt_set.size(), enc.size() + sec.size());

  EXPECT_THROW(model->partition({"heads"}), std::invalid_argument);
}

TEST(Partition, FrozenHeadContract) {
  auto model = build_model<float>(tiny_config());
  const auto primary_before = model->digest_of(model->partition({"primary"}));
  const auto encoder_before = model->digest_of(model->partition({"encoder"}));

  Adam<float> opt(model->partition({"encoder", "secondary"}));
  Rng rng(12);
  for (int step = 0; step < 5; ++step) {
    opt.zero_grad();
    for (auto* p : opt.params())
      for (auto& g : p->grad.v) g = static_cast<float>(rng.normal());
    opt.step(0.01);
  }
  EXPECT_EQ(model->digest_of(model->partition({"primary"})), primary_before);
  EXPECT_NE(model->digest_of(model->partition({"encoder"})), encoder_before);
}

TEST(Checkpoint, SaveLoadRoundTrip) {
  auto model = build_model<float>(tiny_config());
  model->encode(random_images(4, 16, 13), BnMode::train());  // move stats
  const auto dir = fs::temp_directory_path() / "tta_test_ckpt";
  fs::remove_all(dir);
  save_checkpoint(*model, dir, 42, 7);

  auto loaded = load_checkpoint(dir);
  EXPECT_EQ(loaded.training_step, 42);
  EXPECT_EQ(loaded.model->digest(), model->digest());

  // export-weights re-emits a loadable store
  const auto exp = dir / "exported";
  export_weights(*model, exp);
  auto fresh = build_model<float>(tiny_config());
  import_weights(*fresh, exp);
  EXPECT_EQ(fresh->digest(), model->digest());

  // wrong-architecture import fails on shape mismatch
  ModelConfig other = tiny_config();
  other.latent_dim = 12;
  auto mismatched = build_model<float>(other);
  EXPECT_THROW(import_weights(*mismatched, exp), UsageError);
  fs::remove_all(dir);
}

TEST(ModelConfig, DefaultsMatchDesignChoices) {
  const ModelConfig cfg;
  EXPECT_EQ(cfg.latent_dim, 512);
  EXPECT_EQ(cfg.proj_dim, 128);
  EXPECT_EQ(cfg.proj_hidden, 256);
  EXPECT_EQ(cfg.rsp_pair_hidden, 256);
  EXPECT_EQ(cfg.rsp_cls_hidden, 256);
  EXPECT_EQ(cfg.image_size, 64);
  EXPECT_EQ(cfg.channels, (std::vector<int>{16, 32, 64, 128}));
}

TEST(Clone, IndependentCopy) {
  auto model = build_model<float>(tiny_config());
  auto copy = model->clone();
  EXPECT_EQ(copy->digest(), model->digest());
  copy->params().front()->value[0] += 1.0f;
  EXPECT_NE(copy->digest(), model->digest());
}
