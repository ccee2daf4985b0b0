#include <gtest/gtest.h>

#include "testutil.hpp"
#include "tta/data/corpus_io.hpp"

using namespace tta;
using namespace tta::testutil;

// ---------------------------------------------------------------------------
// joint_loss and the schedule
// ---------------------------------------------------------------------------

TEST(JointLoss, SpecValues) {
  // lambda 0 passes the primary loss through untouched
  EXPECT_DOUBLE_EQ(joint_loss(0.445, 1.796, 0.0), 0.445);
  EXPECT_DOUBLE_EQ(joint_loss(1.0, 2.0, 0.5), 1.5);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double lp = rng.normal(), ls = rng.normal();
    EXPECT_DOUBLE_EQ(joint_loss(lp, ls, 1.0), ls);
    const double lam = rng.uniform();
    EXPECT_DOUBLE_EQ(joint_loss(lp, ls, lam), (1.0 - lam) * lp + lam * ls);
  }
}

TEST(JointLoss, RejectsBadInputs) {
  EXPECT_THROW(joint_loss(1.0, 1.0, -0.1), std::invalid_argument);
  EXPECT_THROW(joint_loss(1.0, 1.0, 1.1), std::invalid_argument);
  EXPECT_THROW(joint_loss(std::numeric_limits<double>::infinity(), 1.0, 0.5), std::invalid_argument);
  EXPECT_THROW(joint_loss(1.0, std::nan(""), 0.5), std::invalid_argument);
}

TEST(TrainingConfig, DefaultsMatchSchedule) {
  const TrainingConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.lr, 0.001);
  EXPECT_DOUBLE_EQ(cfg.lr_gamma, 0.5);
  EXPECT_EQ(cfg.lr_period, 5000);
  EXPECT_EQ(cfg.log_period, 250);
  EXPECT_EQ(cfg.val_steps, 120);
  EXPECT_EQ(cfg.batch_size, 24);
}

TEST(LrSchedule, StepDecayFormula) {
  TrainingConfig cfg;  // lr 0.001, gamma 0.5, period 5000
  EXPECT_DOUBLE_EQ(lr_at(0, cfg), 0.001);
  EXPECT_DOUBLE_EQ(lr_at(249, cfg), 0.001);
  EXPECT_DOUBLE_EQ(lr_at(4999, cfg), 0.001);
  EXPECT_DOUBLE_EQ(lr_at(5000, cfg), 0.0005);
  EXPECT_DOUBLE_EQ(lr_at(9999, cfg), 0.0005);
  EXPECT_DOUBLE_EQ(lr_at(12000, cfg), 0.00025);
  EXPECT_THROW(lr_at(-1, cfg), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Batch assembly
// ---------------------------------------------------------------------------

TEST(JointBatch, PrimaryAugmentationPrecedesSecondaryOps) {
  const TinyWorld w = make_tiny_world(5);
  std::vector<const PatchRecord*> recs;
  for (size_t i = 0; i < 6; ++i) recs.push_back(&w.train[i]);
  AugLog log;
  build_joint_batch(recs, TaskKind::rsp, mild_augment(), 9, 0, true, &log);
  // for every example, all primary-stage entries come before any secondary one
  for (int e = 0; e < 6; ++e) {
    bool secondary_seen = false;
    int primary_ops = 0;
    for (const auto& entry : log.entries) {
      if (entry.example != e) continue;
      if (entry.stage == "secondary") secondary_seen = true;
      if (entry.stage == "primary") {
        ++primary_ops;
        EXPECT_FALSE(secondary_seen);
      }
    }
    EXPECT_GE(primary_ops, 1);
  }
}

TEST(JointBatch, RspReplaysPrimaryAugmentationOnEveryLevel) {
  const TinyWorld w = make_tiny_world(6);
  std::vector<const PatchRecord*> recs = {&w.train[0], &w.train[1], &w.train[2]};
  const AugmentationConfig aug = mild_augment();
  const JointBatch batch = build_joint_batch(recs, TaskKind::rsp, aug, 13, 2, true);
  const std::int64_t img_px = 16 * 16 * 3;
  for (int e = 0; e < 3; ++e) {
    // find the displayed position carrying level 0; it must equal the primary image
    const auto order = order_of_label(batch.rsp_labels[static_cast<size_t>(e)]);
    for (int p = 0; p < 3; ++p) {
      if (order[static_cast<size_t>(p)] != 0) continue;
      for (std::int64_t k = 0; k < img_px; ++k)
        ASSERT_EQ(batch.rsp[(3 * e + p) * img_px + k], batch.primary[e * img_px + k]);
    }
  }
}

TEST(JointBatch, SimclrViewLayout) {
  const TinyWorld w = make_tiny_world(7);
  std::vector<const PatchRecord*> recs = {&w.train[0], &w.train[1]};
  const JointBatch batch = build_joint_batch(recs, TaskKind::simclr, mild_augment(), 17, 0, true);
  EXPECT_EQ(batch.views.dim(0), 4);  // (a1, a2, b1, b2)
  EXPECT_TRUE(batch.rsp.empty());
}

// ---------------------------------------------------------------------------
// Training loop contracts
// ---------------------------------------------------------------------------

TEST(Train, LambdaZeroJointBitIdenticalToVanilla) {
  const TinyWorld w = make_tiny_world(8);

  auto joint_model = build_model<float>(tiny_model());
  TrainingConfig joint_cfg = fast_training(30);
  joint_cfg.lambda_s = 0.0;
  joint_cfg.mode = TrainMode::joint;  // secondary forward still executed, weight exactly 0
  MetricLog joint_log;
  train(*joint_model, w.train, w.val, joint_cfg, mild_augment(), 21, joint_log);

  auto vanilla_model = build_model<float>(tiny_model());
  TrainingConfig vanilla_cfg = fast_training(30);
  vanilla_cfg.lambda_s = 0.0;
  vanilla_cfg.mode = TrainMode::vanilla;  // secondary path disabled entirely
  MetricLog vanilla_log;
  train(*vanilla_model, w.train, w.val, vanilla_cfg, mild_augment(), 21, vanilla_log);

  EXPECT_EQ(joint_model->digest(), vanilla_model->digest());
}

TEST(Train, VanillaModeRequiresLambdaZero) {
  const TinyWorld w = make_tiny_world(9);
  auto model = build_model<float>(tiny_model());
  TrainingConfig cfg = fast_training(5);
  cfg.mode = TrainMode::vanilla;
  cfg.lambda_s = 0.1;
  MetricLog log;
  EXPECT_THROW(train(*model, w.train, w.val, cfg, mild_augment(), 1, log), UsageError);
}

TEST(Train, ValidationCadenceAndBatchCount) {
  const TinyWorld w = make_tiny_world(10);
  auto model = build_model<float>(tiny_model());
  TrainingConfig cfg = fast_training(250);
  cfg.log_period = 100;
  cfg.val_steps = 7;
  MetricLog log;
  train(*model, w.train, w.val, cfg, mild_augment(), 2, log);

  std::map<long, double> batches;  // step -> validation batches evaluated
  std::set<long> val_loss_steps;
  for (const auto& r : log.records()) {
    if (r.split == "val" && r.task == "run" && r.metric == "batches") batches[r.step] = r.value;
    if (r.split == "val" && r.task == "primary" && r.metric == "loss") val_loss_steps.insert(r.step);
  }
  EXPECT_EQ(val_loss_steps, (std::set<long>{0, 100, 200}));
  for (const auto& [step, count] : batches) EXPECT_EQ(count, 7);
}

TEST(Train, BestCheckpointIsArgminOfLoggedValidationLoss) {
  const TinyWorld w = make_tiny_world(12);
  auto model = build_model<float>(tiny_model());
  TrainingConfig cfg = fast_training(200);
  cfg.log_period = 50;
  MetricLog log;
  const TrainOutcome out = train(*model, w.train, w.val, cfg, mild_augment(), 4, log);

  double best = std::numeric_limits<double>::infinity();
  long best_step = -1;
  for (const auto& r : log.records())
    if (r.split == "val" && r.task == "primary" && r.metric == "loss" && r.value < best) {
      best = r.value;
      best_step = r.step;
    }
  EXPECT_EQ(out.best_step, best_step);
  EXPECT_DOUBLE_EQ(out.best_val_primary, best);
  EXPECT_DOUBLE_EQ(out.best_val_objective, best);
}

TEST(Train, DivergenceAbortsWithDiagnosticRecord) {
  const TinyWorld w = make_tiny_world(13);
  auto model = build_model<float>(tiny_model());
  TrainingConfig cfg = fast_training(50);
  cfg.lr = 1e18;  // guaranteed blow-up
  MetricLog log;
  EXPECT_THROW(train(*model, w.train, w.val, cfg, mild_augment(), 5, log), TrainingDiverged);
  bool diagnosed = false;
  for (const auto& r : log.records()) diagnosed = diagnosed || r.metric == "diverged";
  EXPECT_TRUE(diagnosed);
}

TEST(Train, DeterministicUnderSeeds) {
  const TinyWorld w = make_tiny_world(14);
  auto a = build_model<float>(tiny_model());
  auto b = build_model<float>(tiny_model());
  MetricLog la, lb;
  TrainingConfig cfg = fast_training(25);
  train(*a, w.train, w.val, cfg, mild_augment(), 6, la);
  train(*b, w.train, w.val, cfg, mild_augment(), 6, lb);
  EXPECT_EQ(a->digest(), b->digest());
  ASSERT_EQ(la.records().size(), lb.records().size());
  for (size_t i = 0; i < la.records().size(); ++i)
    EXPECT_EQ(la.records()[i].value, lb.records()[i].value);
}

// ---------------------------------------------------------------------------
// Pretraining and fine-tuning
// ---------------------------------------------------------------------------

TEST(Pretrain, PrimaryHeadUntouchedAndSecondaryLearns) {
  const TinyWorld w = make_tiny_world(15, 16, 30);
  auto model = build_model<float>(tiny_model());
  const auto primary_before = model->digest_of(model->partition({"primary"}));

  MetricLog log;
  TrainingConfig cfg = fast_training(400);
  cfg.log_period = 100;
  const TrainOutcome out = pretrain_secondary(*model, w.train, w.val, cfg, mild_augment(), 8, log);

  EXPECT_EQ(model->digest_of(model->partition({"primary"})), primary_before);
  // resolution-sequence loss drops below the random-guess plateau ln 6
  EXPECT_LT(out.best_val_objective, std::log(6.0));

  // determinism of the pretraining path
  auto again = build_model<float>(tiny_model());
  MetricLog log2;
  pretrain_secondary(*again, w.train, w.val, cfg, mild_augment(), 8, log2);
  EXPECT_EQ(again->digest(), model->digest());
}

TEST(Finetune, SecondaryHeadBitIdenticalAndNoSecondaryLearning) {
  const TinyWorld w = make_tiny_world(16, 16, 30);
  auto model = build_model<float>(tiny_model());
  const auto secondary_before = model->digest_of(model->partition({"secondary"}));

  MetricLog log;
  TrainingConfig cfg = fast_training(200);
  cfg.log_period = 50;
  cfg.val_steps = 8;
  finetune_primary(*model, w.train, w.val, cfg, mild_augment(), 9, log);

  EXPECT_EQ(model->digest_of(model->partition({"secondary"})), secondary_before);

  // An untrained head is a fixed map from resolution signatures to labels, so
  // per-point accuracy is (number of fixed points)/6 rather than a binomial
  // draw around 1/6 (a random map has none ~37% of the time). The meaningful
  // claim is that the secondary task shows no learning: every logged point
  // stays far below trained performance and the mean stays near chance.
  int points = 0;
  double mean_acc = 0;
  for (const auto& r : log.records())
    if (r.split == "val" && r.task == "secondary" && r.metric == "accuracy") {
      ++points;
      mean_acc += r.value;
      EXPECT_LE(r.value, 4.0 / 6.0);
    }
  ASSERT_GE(points, 4);
  EXPECT_LE(mean_acc / points, 0.4);
}

TEST(Finetune, PretrainedSecondaryAccuracyHighAtStepZero) {
  const TinyWorld w = make_tiny_world(17, 16, 30);
  auto model = build_model<float>(tiny_model());
  MetricLog pre_log;
  TrainingConfig pre_cfg = fast_training(500);
  pre_cfg.log_period = 250;
  pretrain_secondary(*model, w.train, w.val, pre_cfg, mild_augment(), 10, pre_log);

  MetricLog fin_log;
  TrainingConfig fin_cfg = fast_training(50);
  fin_cfg.log_period = 50;
  fin_cfg.val_steps = 8;
  finetune_primary(*model, w.train, w.val, fin_cfg, mild_augment(), 10, fin_log);

  double step0_acc = -1;
  for (const auto& r : fin_log.records())
    if (r.step == 0 && r.split == "val" && r.task == "secondary" && r.metric == "accuracy")
      step0_acc = r.value;
  EXPECT_GT(step0_acc, 0.9);
}

// ---------------------------------------------------------------------------
// Metric log + CSV
// ---------------------------------------------------------------------------

TEST(MetricLog, RejectsNonFiniteValues) {
  MetricLog log;
  EXPECT_THROW(log.add(0, "train", "primary", "loss", std::nan("")), std::invalid_argument);
  log.add(0, "train", "primary", "loss", 0.25);
  const auto path = fs::temp_directory_path() / "tta_test_metrics.csv";
  log.write_csv(path);
  const std::string text = read_text_file(path);
  EXPECT_EQ(text, "step,split,task,metric,value\n0,train,primary,loss,0.25\n");
  fs::remove(path);
}
