// Acceptance suite: one self-contained check per shipping criterion, each
// printing a PASS/FAIL line. Run with no arguments for the full gate or with
// criterion numbers (e.g. "./tta_acceptance 1 2 7") during development.

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>

#include "tta/adapt/adapt.hpp"
#include "tta/harness/experiment.hpp"

using namespace tta;

namespace {

struct Check {
  int id;
  const char* name;
  std::function<bool(std::string&)> run;
};

bool approx(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// ---------------------------------------------------------------------------
// Shared fixtures
// ---------------------------------------------------------------------------

ModelConfig small_model(TaskKind task = TaskKind::rsp) {
  ModelConfig cfg;
  cfg.image_size = 16;
  cfg.latent_dim = 16;
  cfg.channels = {8, 16};
  cfg.task = task;
  cfg.rsp_pair_hidden = 16;
  cfg.rsp_pair_out = 16;
  cfg.rsp_cls_hidden = 16;
  cfg.proj_hidden = 16;
  cfg.proj_dim = 8;
  cfg.seed = 7;
  return cfg;
}

DataConfig small_data() {
  DataConfig cfg;
  cfg.n_slides = 5;
  cfg.slide_size = 256;
  cfg.cell_px = 64;
  cfg.patch_size = 16;
  cfg.patches_per_slide = 24;
  cfg.texture.octave_spacing = {24, 6, 2};
  cfg.texture.fine_spacing = 1;
  return cfg;
}

struct SmallWorld {
  std::vector<PatchRecord> train, val, test;
};

SmallWorld make_small_world(std::uint64_t seed) {
  SmallWorld w;
  const DataConfig cfg = small_data();
  const auto slides = generate_synthetic_dataset(cfg, seed);
  for (size_t i = 0; i < slides.size(); ++i) {
    auto recs = sample_patches(slides[i], cfg.patches_per_slide, cfg.patch_size,
                               derive_seed(seed, "patches"));
    auto& dst = i < 3 ? w.train : (i == 3 ? w.val : w.test);
    std::move(recs.begin(), recs.end(), std::back_inserter(dst));
  }
  return w;
}

/// Trained small RSP model reused by the adaptation criteria.
struct TrainedSmall {
  SmallWorld world;
  std::unique_ptr<ModelBundle<float>> model;

  static const TrainedSmall& get() {
    static TrainedSmall t = [] {
      TrainedSmall out;
      out.world = make_small_world(11);
      out.model = build_model<float>(small_model());
      TrainingConfig cfg;
      cfg.steps = 700;
      cfg.batch_size = 12;
      cfg.log_period = 350;
      cfg.val_steps = 4;
      cfg.lambda_s = 0.01;
      AugmentationConfig aug;
      aug.primary.jitter = 0;
      aug.primary.hflip_prob = 0;
      aug.primary.vflip_prob = 0;
      MetricLog log;
      train(*out.model, out.world.train, out.world.val, cfg, aug, 3, log);
      return out;
    }();
    return t;
  }
};

// ---------------------------------------------------------------------------
// 1. NT-Xent against the brute-force oracle
// ---------------------------------------------------------------------------

double nt_xent_oracle(const Tensor<double>& proj, double tau) {
  const int m = proj.dim(0), d = proj.dim(1);
  const int n = m / 2;
  std::vector<std::vector<double>> z(static_cast<size_t>(m), std::vector<double>(static_cast<size_t>(d)));
  for (int i = 0; i < m; ++i) {
    double norm = 0;
    for (int k = 0; k < d; ++k) norm += proj[i * d + k] * proj[i * d + k];
    norm = std::sqrt(norm);
    for (int k = 0; k < d; ++k) z[static_cast<size_t>(i)][static_cast<size_t>(k)] = proj[i * d + k] / norm;
  }
  double total = 0;
  for (int i = 0; i < m; ++i) {
    const int pos = (i + n) % m;
    const auto sim = [&](int a, int b) {
      double s = 0;
      for (int k = 0; k < d; ++k)
        s += z[static_cast<size_t>(a)][static_cast<size_t>(k)] * z[static_cast<size_t>(b)][static_cast<size_t>(k)];
      return s / tau;
    };
    double denom = 0;
    for (int j = 0; j < m; ++j)
      if (j != i) denom += std::exp(sim(i, j));
    total += -std::log(std::exp(sim(i, pos)) / denom);
  }
  return total / m;
}

bool criterion1(std::string& detail) {
  Rng rng(101);
  double max_err = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + rng.uniform_int(8);
    const int d = 2 + rng.uniform_int(14);
    Tensor<double> proj({2 * n, d});
    for (auto& v : proj.v) v = rng.normal();
    for (const double tau : {0.1, 0.5, 1.0})
      max_err = std::max(max_err, std::abs(nt_xent(proj, tau) - nt_xent_oracle(proj, tau)));
  }
  // N = 1: exactly zero
  Tensor<double> pair({2, 6});
  for (auto& v : pair.v) v = rng.normal();
  const double single = nt_xent(pair, 0.5);
  // all-identical projections, N = 2: ln 3
  Tensor<double> same({4, 6});
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 6; ++k) same[i * 6 + k] = pair[k];
  const double ln3 = nt_xent(same, 0.5);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "max oracle diff %.2e, N=1 loss %.1e, identical %.9f vs ln3", max_err,
                single, ln3);
  detail = buf;
  return max_err <= 1e-5 && single == 0.0 && approx(ln3, std::log(3.0), 1e-6);
}

// ---------------------------------------------------------------------------
// 2. RSP correctness
// ---------------------------------------------------------------------------

bool criterion2(std::string& detail) {
  // exhaustive bijection
  for (int k = 0; k < 6; ++k)
    if (label_of_order(order_of_label(k)) != k) {
      detail = "bijection broken at label " + std::to_string(k);
      return false;
    }
  if (order_of_label(0) != (std::array<int, 3>{0, 1, 2}) ||
      order_of_label(5) != (std::array<int, 3>{2, 1, 0}) || label_of_order({1, 0, 2}) != 2) {
    detail = "bijection anchors wrong";
    return false;
  }
  Tensor<double> logits({5, 6}, 1.25);
  const double uniform_ce = rsp_loss(logits, {0, 1, 2, 3, 4});
  auto model = build_model<double>(small_model());
  const int pair_width = model->rsp_head()->pair_input_width();
  char buf[120];
  std::snprintf(buf, sizeof(buf), "uniform CE %.12f vs ln6, pair width %d = 2x%d", uniform_ce, pair_width,
                model->config().latent_dim);
  detail = buf;
  return approx(uniform_ce, std::log(6.0), 1e-9) && pair_width == 2 * model->config().latent_dim;
}

// ---------------------------------------------------------------------------
// 3. joint loss algebra, lr schedule, lambda-0 bit equivalence
// ---------------------------------------------------------------------------

bool criterion3(std::string& detail) {
  Rng rng(103);
  for (int i = 0; i < 1000; ++i) {
    const double lp = rng.normal(0, 3), ls = rng.normal(0, 3), lam = rng.uniform();
    if (joint_loss(lp, ls, lam) != (1.0 - lam) * lp + lam * ls) {
      detail = "joint loss identity violated";
      return false;
    }
  }
  TrainingConfig sched;
  const long steps[] = {0, 249, 5000, 9999, 12000};
  const double want[] = {0.001, 0.001, 0.0005, 0.0005, 0.00025};
  for (int i = 0; i < 5; ++i)
    if (lr_at(steps[i], sched) != want[i]) {
      detail = "lr schedule mismatch at step " + std::to_string(steps[i]);
      return false;
    }

  // lambda_s = 0 joint run vs secondary-disabled run, 100 steps, bit identity
  const SmallWorld w = make_small_world(31);
  TrainingConfig cfg;
  cfg.steps = 100;
  cfg.batch_size = 6;
  cfg.log_period = 50;
  cfg.val_steps = 2;
  cfg.lambda_s = 0.0;
  AugmentationConfig aug;

  auto joint_model = build_model<float>(small_model());
  cfg.mode = TrainMode::joint;
  MetricLog l1;
  train(*joint_model, w.train, w.val, cfg, aug, 5, l1);

  auto vanilla_model = build_model<float>(small_model());
  cfg.mode = TrainMode::vanilla;
  MetricLog l2;
  train(*vanilla_model, w.train, w.val, cfg, aug, 5, l2);

  const bool equal = joint_model->digest() == vanilla_model->digest();
  detail = equal ? "identity + schedule exact; 100-step digests equal" : "lambda-0 digests differ";
  return equal;
}

// ---------------------------------------------------------------------------
// 4. gradient check of the combined loss (tiny model, central differences)
// ---------------------------------------------------------------------------

bool criterion4(std::string& detail) {
  ModelConfig cfg = small_model();
  cfg.image_size = 8;
  cfg.latent_dim = 8;
  cfg.channels = {4, 8};
  auto model = build_model<double>(cfg);

  const int n = 3;
  const double lambda = 0.3;
  Rng rng(104);
  Tensor<double> primary({n, 8, 8, 3});
  for (auto& v : primary.v) v = rng.uniform();
  Tensor<double> pyramids({3 * n, 8, 8, 3});
  for (auto& v : pyramids.v) v = rng.uniform();
  std::vector<int> labels, rsp_labels;
  for (int i = 0; i < n; ++i) {
    labels.push_back(rng.uniform_int(3));
    rsp_labels.push_back(rng.uniform_int(6));
  }

  const auto combined_loss = [&]() {
    auto lat_p = model->encode(primary, BnMode::train_no_update());
    const double lp = cross_entropy(model->predict_primary(lat_p), labels);
    auto lat_s = model->encode(pyramids, BnMode::train_no_update());
    const double ls = rsp_loss(model->forward_rsp(lat_s), rsp_labels);
    return joint_loss(lp, ls, lambda);
  };

  // analytic gradients
  model->zero_grad();
  {
    auto path = model->forward_primary_path(primary, BnMode::train_no_update());
    Tensor<double> dlogits;
    cross_entropy(path.logits, labels, &dlogits);
    for (auto& g : dlogits.v) g *= (1.0 - lambda);
    model->backward_primary_path(dlogits, path);
    auto spath = model->forward_rsp_path(pyramids, BnMode::train_no_update());
    Tensor<double> dslogits;
    rsp_loss(spath.logits, rsp_labels, &dslogits);
    for (auto& g : dslogits.v) g *= lambda;
    model->backward_rsp_path(dslogits, spath);
  }

  // 20 random parameter coordinates with non-degenerate gradients
  const auto params = model->trainable_params();
  Rng pick(105);
  double max_rel = 0;
  int checked = 0;
  int guard = 0;
  while (checked < 20 && ++guard < 500) {
    auto* p = params[static_cast<size_t>(pick.uniform_int(static_cast<int>(params.size())))];
    const std::int64_t i = pick.uniform_int(static_cast<int>(p->value.size()));
    const double analytic = p->grad[i];
    if (std::abs(analytic) < 1e-6) continue;  // FD is meaningless at dead coordinates
    const double h = 1e-4;
    const double orig = p->value[i];
    p->value[i] = orig + h;
    const double up = combined_loss();
    p->value[i] = orig - h;
    const double down = combined_loss();
    p->value[i] = orig;
    const double fd = (up - down) / (2 * h);
    max_rel = std::max(max_rel, std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-8}));
    ++checked;
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "%d coordinates, max relative error %.2e", checked, max_rel);
  detail = buf;
  return checked == 20 && max_rel < 1e-3;
}

// ---------------------------------------------------------------------------
// 5. adaptation scope contracts over 50 random episodes per method
// ---------------------------------------------------------------------------

bool criterion5(std::string& detail) {
  const auto& fx = TrainedSmall::get();
  Rng rng(501);
  const double etas[] = {1e-4, 1e-3, 1e-2};
  int episodes_ok = 0, episodes = 0;
  for (const auto method : {AdaptConfig::Method::ttt, AdaptConfig::Method::tent,
                            AdaptConfig::Method::adabn, AdaptConfig::Method::memo}) {
    auto model = fx.model->clone();
    for (int e = 0; e < 50; ++e) {
      const size_t n = method == AdaptConfig::Method::memo ? 1 : 2 + static_cast<size_t>(rng.uniform_int(5));
      const size_t offset = static_cast<size_t>(rng.uniform_int(static_cast<int>(fx.world.test.size() - n)));
      std::vector<const PatchRecord*> unit;
      for (size_t i = 0; i < n; ++i) unit.push_back(&fx.world.test[offset + i]);

      AdaptConfig cfg;
      cfg.method = method;
      cfg.step_size = etas[rng.uniform_int(3)];
      cfg.seed = static_cast<std::uint64_t>(e);
      cfg.memo_k = 4;
      const std::uint64_t before = model->digest();
      EpisodeAudit audit;
      switch (method) {
        case AdaptConfig::Method::ttt:
          ttt_adapt(*model, unit, TaskKind::rsp, cfg, SimclrAugConfig{}, &audit);
          break;
        case AdaptConfig::Method::tent:
          tent_adapt(*model, unit, cfg, &audit);
          break;
        case AdaptConfig::Method::adabn:
          adabn_episode(*model, unit, &audit);
          break;
        case AdaptConfig::Method::memo:
          memo_adapt(*model, *unit[0], cfg, SimclrAugConfig{}, &audit);
          break;
        default:
          break;
      }
      ++episodes;
      if (audit.scope_ok && audit.restored && model->digest() == before) ++episodes_ok;
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "%d/%d episodes honored scope + full restore", episodes_ok, episodes);
  detail = buf;
  return episodes_ok == episodes && episodes == 200;
}

// ---------------------------------------------------------------------------
// 6. repeatability under test-set permutation, single-sample granularity
// ---------------------------------------------------------------------------

bool criterion6(std::string& detail) {
  const auto& fx = TrainedSmall::get();
  std::vector<PatchRecord> records(fx.world.test.begin(), fx.world.test.end());
  std::vector<PatchRecord> permuted = records;
  Rng rng(601);
  rng.shuffle(permuted);

  for (const auto method :
       {AdaptConfig::Method::none, AdaptConfig::Method::ttt, AdaptConfig::Method::adabn,
        AdaptConfig::Method::tent, AdaptConfig::Method::memo}) {
    auto model = fx.model->clone();
    AdaptConfig cfg;
    cfg.method = method;
    cfg.step_size = 1e-2;
    cfg.granularity = AdaptConfig::Granularity::single;
    cfg.tent_allow_single = true;
    cfg.memo_k = 4;
    const auto a = evaluate_with_adaptation(*model, records, ShiftSpec::gaussian_noise(0.05), cfg,
                                            AugmentationConfig{}, 61);
    const auto b = evaluate_with_adaptation(*model, permuted, ShiftSpec::gaussian_noise(0.05), cfg,
                                            AugmentationConfig{}, 61);
    for (size_t i = 0; i < records.size(); ++i) {
      size_t j = 0;
      while (permuted[j].key() != records[i].key()) ++j;
      for (int c = 0; c < 3; ++c)
        if (a.logits[static_cast<std::int64_t>(i) * 3 + c] !=
            b.logits[static_cast<std::int64_t>(j) * 3 + c]) {
          detail = std::string("per-sample logits differ under permutation for method ") +
                   AdaptConfig::method_name(method);
          return false;
        }
    }
  }
  detail = "all five methods permutation-exact over " + std::to_string(records.size()) + " samples";
  return true;
}

// ---------------------------------------------------------------------------
// 7. eta continuity
// ---------------------------------------------------------------------------

bool criterion7(std::string& detail) {
  const auto& fx = TrainedSmall::get();
  auto model = fx.model->clone();
  std::vector<PatchRecord> records(fx.world.test.begin(), fx.world.test.begin() + 12);

  AdaptConfig none;
  none.method = AdaptConfig::Method::none;
  const auto base = evaluate_with_adaptation(*model, records, ShiftSpec::identity(), none,
                                             AugmentationConfig{}, 71);
  AdaptConfig tiny;
  tiny.method = AdaptConfig::Method::ttt;
  tiny.step_size = 1e-8;
  tiny.episode_size = 6;
  const auto small = evaluate_with_adaptation(*model, records, ShiftSpec::identity(), tiny,
                                              AugmentationConfig{}, 71);
  float max_diff = 0;
  for (std::int64_t i = 0; i < base.logits.size(); ++i)
    max_diff = std::max(max_diff, std::abs(base.logits[i] - small.logits[i]));

  AdaptConfig zero = tiny;
  zero.step_size = 0.0;
  const auto exact = evaluate_with_adaptation(*model, records, ShiftSpec::identity(), zero,
                                              AugmentationConfig{}, 71);
  const bool zero_exact = exact.logits.v == base.logits.v;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "max |dlogit| at eta=1e-8: %.2e; eta=0 exact: %s", max_diff,
                zero_exact ? "yes" : "no");
  detail = buf;
  return max_diff < 1e-4f && zero_exact;
}

// ---------------------------------------------------------------------------
// 8. covariate-shift damage at desk scale (3 seeds)
// ---------------------------------------------------------------------------

ExperimentConfig desk_scale_config(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.data.n_slides = 20;
  cfg.data.slide_size = 768;
  cfg.data.cell_px = 192;
  cfg.data.patch_size = 32;
  cfg.data.patches_per_slide = 100;
  cfg.model.image_size = 32;
  cfg.model.latent_dim = 64;
  cfg.model.channels = {8, 16, 32, 64};
  cfg.model.task = TaskKind::rsp;
  cfg.model.seed = seed;
  cfg.training.steps = 2000;
  cfg.training.batch_size = 24;
  cfg.training.lambda_s = 0.01;
  cfg.training.log_period = 250;
  cfg.training.val_steps = 20;
  return cfg;
}

bool criterion8(std::string& detail) {
  const double sigmas[] = {0.0, 0.05, 0.1, 0.2};
  double mean_acc[4] = {0, 0, 0, 0};
  for (const std::uint64_t seed : {7ull, 8ull, 9ull}) {
    const ExperimentConfig cfg = desk_scale_config(seed);
    const PreparedData data = prepare_data(cfg);
    auto model = build_model<float>(cfg.model);
    MetricLog log;
    const auto out = train(*model, data.train(), data.val(), cfg.training, cfg.augment,
                           derive_seed(seed, "train"), log);
    model->restore(out.best_snapshot);
    AdaptConfig none;
    none.method = AdaptConfig::Method::none;
    for (int i = 0; i < 4; ++i) {
      const ShiftSpec spec = sigmas[i] == 0 ? ShiftSpec::identity() : ShiftSpec::gaussian_noise(sigmas[i]);
      const auto r = evaluate_with_adaptation(*model, data.test_a(), spec, none, cfg.augment, seed);
      mean_acc[i] += r.accuracy / 3.0;
    }
  }
  // non-increasing accuracy trend over the sigma grid (shift monotonicity)
  bool monotone = true;
  for (int i = 0; i + 1 < 4; ++i) monotone = monotone && mean_acc[i] >= mean_acc[i + 1] - 0.005;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "mean accuracy by sigma {0, .05, .1, .2} = {%.3f, %.3f, %.3f, %.3f}; drop %.1f pts",
                mean_acc[0], mean_acc[1], mean_acc[2], mean_acc[3], 100 * (mean_acc[0] - mean_acc[3]));
  detail = buf;
  return mean_acc[0] >= 0.85 && (mean_acc[0] - mean_acc[3]) >= 0.05 && monotone;
}

// ---------------------------------------------------------------------------
// 9. experiment-shape replication with byte-identical reruns
// ---------------------------------------------------------------------------

ExperimentConfig experiment_config(std::uint64_t seed) {
  ExperimentConfig cfg = desk_scale_config(seed);
  cfg.training.steps = 300;
  cfg.training.log_period = 100;
  cfg.training.val_steps = 10;
  cfg.data.patches_per_slide = 60;
  return cfg;
}

bool criterion9(std::string& detail) {
  const fs::path base = fs::temp_directory_path() / "tta_acceptance_exp";
  fs::remove_all(base);

  // experiment 1: 5-row lambda table + both secondary-accuracy curves
  ExperimentConfig cfg1 = experiment_config(7);
  run_experiment1(cfg1, base / "exp1a");
  run_experiment1(cfg1, base / "exp1b");
  const CsvTable lam = read_csv(base / "exp1a" / "lambda_sweep.csv");
  if (lam.rows.size() != 5) {
    detail = "lambda table has " + std::to_string(lam.rows.size()) + " rows, want 5";
    return false;
  }
  const CsvTable curves = read_csv(base / "exp1a" / "exp13_secondary_accuracy.csv");
  bool has_pre = false, has_rand = false;
  for (const auto& r : curves.rows) {
    has_pre = has_pre || r[0] == "pretrained";
    has_rand = has_rand || r[0] == "random";
  }
  if (!has_pre || !has_rand) {
    detail = "missing an exp 1.3 curve";
    return false;
  }
  if (read_text_file(base / "exp1a" / "lambda_sweep.csv") !=
          read_text_file(base / "exp1b" / "lambda_sweep.csv") ||
      read_text_file(base / "exp1a" / "exp13_secondary_accuracy.csv") !=
          read_text_file(base / "exp1b" / "exp13_secondary_accuracy.csv")) {
    detail = "experiment 1 rerun not byte-identical";
    return false;
  }

  // experiment 2: 15-point grid, eta=0 rows equal the unadapted baseline
  ExperimentConfig cfg2 = experiment_config(7);
  cfg2.model.task = TaskKind::simclr;
  cfg2.training.batch_size = 48;
  run_experiment2(cfg2, base / "exp2a");
  run_experiment2(cfg2, base / "exp2b");
  const CsvTable sweep = read_csv(base / "exp2a" / "step_size_sweep.csv");
  const CsvTable baseline = read_csv(base / "exp2a" / "baseline.csv");
  if (sweep.rows.size() != 15) {
    detail = "step-size grid has " + std::to_string(sweep.rows.size()) + " rows, want 15";
    return false;
  }
  for (const auto& brow : baseline.rows) {
    bool matched = false;
    for (const auto& srow : sweep.rows)
      if (srow[0] == brow[0] && srow[1] == "0" && srow[2] == brow[1] && srow[3] == brow[2]) matched = true;
    if (!matched) {
      detail = "eta=0 row does not match the unadapted baseline for shift " + brow[0];
      return false;
    }
  }
  if (read_text_file(base / "exp2a" / "step_size_sweep.csv") !=
      read_text_file(base / "exp2b" / "step_size_sweep.csv")) {
    detail = "experiment 2 rerun not byte-identical";
    return false;
  }
  detail = "5-row lambda table, both curves, 15-point grid, eta=0 = baseline, reruns byte-identical";
  fs::remove_all(base);
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Check> checks = {
      {1, "NT-Xent loss oracle", criterion1},
      {2, "RSP correctness", criterion2},
      {3, "joint loss, lr schedule, lambda-0 bit equivalence", criterion3},
      {4, "combined-loss gradient check", criterion4},
      {5, "adaptation scope contracts", criterion5},
      {6, "repeatability under test-order permutation", criterion6},
      {7, "eta continuity", criterion7},
      {8, "covariate-shift damage at desk scale", criterion8},
      {9, "experiment-shape replication", criterion9},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& check : checks) {
    if (!selected.empty() && !selected.count(check.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = check.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d: %s (%.1f s) -- %s\n", ok ? "PASS" : "FAIL", check.id, check.name,
                secs, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures) std::printf("%d criterion(s) FAILED\n", failures);
  else std::printf("all criteria passed\n");
  return failures == 0 ? 0 : 1;
}
