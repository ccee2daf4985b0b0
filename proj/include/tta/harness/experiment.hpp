#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "tta/harness/config.hpp"
#include "tta/harness/plot.hpp"
#include "tta/io/csv.hpp"
#include "tta/model/checkpoint.hpp"
#include "tta/training/trainer.hpp"

namespace tta {

// ---------------------------------------------------------------------------
// Data preparation shared by the experiment runners
// ---------------------------------------------------------------------------

struct PreparedData {
  std::vector<VirtualSlide> slides;
  SlideSplits splits;
  std::array<std::vector<PatchRecord>, 4> records;  // train, val, testA, testB
  std::uint64_t corpus_digest = 0;

  const std::vector<PatchRecord>& train() const { return records[0]; }
  const std::vector<PatchRecord>& val() const { return records[1]; }
  const std::vector<PatchRecord>& test_a() const { return records[2]; }
  const std::vector<PatchRecord>& test_b() const { return records[3]; }
};

inline PreparedData prepare_data(const ExperimentConfig& cfg) {
  PreparedData out;
  if (!cfg.corpus_dir.empty()) {
    out.slides = load_corpus(cfg.corpus_dir).slides;
  } else {
    out.slides = generate_synthetic_dataset(cfg.data, derive_seed(cfg.seed, "data"));
  }
  out.corpus_digest = corpus_digest(out.slides);
  SplitSpec split = cfg.split;
  split.seed = derive_seed(cfg.seed, "split");
  out.splits = split_slides(static_cast<int>(out.slides.size()), split);
  const std::uint64_t patch_seed = derive_seed(cfg.seed, "patches");
  for (int s = 0; s < 4; ++s)
    for (int slide_id : out.splits.sets[static_cast<size_t>(s)]) {
      auto recs = sample_patches(out.slides[static_cast<size_t>(slide_id)], cfg.data.patches_per_slide,
                                 cfg.data.patch_size, patch_seed);
      std::move(recs.begin(), recs.end(), std::back_inserter(out.records[static_cast<size_t>(s)]));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Table derivation (pure functions of the metric CSVs, reused by the sweep
// runners and by `report` so reruns are byte-identical)
// ---------------------------------------------------------------------------

/// Best validation primary loss and the secondary loss logged at the same
/// step, from one training metrics CSV.
inline std::pair<double, double> best_primary_with_secondary(const fs::path& metrics_csv) {
  const CsvTable t = read_csv(metrics_csv);
  const int c_step = t.column("step"), c_split = t.column("split"), c_task = t.column("task"),
            c_metric = t.column("metric"), c_value = t.column("value");
  double best = std::numeric_limits<double>::infinity();
  std::string best_step;
  for (const auto& r : t.rows)
    if (r[static_cast<size_t>(c_split)] == "val" && r[static_cast<size_t>(c_task)] == "primary" &&
        r[static_cast<size_t>(c_metric)] == "loss") {
      const double v = std::stod(r[static_cast<size_t>(c_value)]);
      if (v < best) {
        best = v;
        best_step = r[static_cast<size_t>(c_step)];
      }
    }
  double secondary = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : t.rows)
    if (r[static_cast<size_t>(c_step)] == best_step && r[static_cast<size_t>(c_split)] == "val" &&
        r[static_cast<size_t>(c_task)] == "secondary" && r[static_cast<size_t>(c_metric)] == "loss")
      secondary = std::stod(r[static_cast<size_t>(c_value)]);
  return {best, secondary};
}

inline std::string lambda_dir_name(double lambda) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "lambda_%g", lambda);
  return buf;
}

/// The exp11/exp12-shaped table from the per-lambda sub-runs.
inline CsvTable derive_lambda_table(const fs::path& run_dir, const std::vector<double>& grid) {
  CsvTable t;
  t.header = {"lambda_s", "best_val_primary_loss", "val_secondary_loss"};
  for (double lambda : grid) {
    const fs::path metrics = run_dir / lambda_dir_name(lambda) / "metrics.csv";
    const auto [best, secondary] = best_primary_with_secondary(metrics);
    char lam[40];
    std::snprintf(lam, sizeof(lam), "%g", lambda);
    t.rows.push_back({lam, format_value(best), format_value(secondary)});
  }
  return t;
}

/// Both Exp-1.3 secondary-accuracy curves from the two fine-tuning runs.
inline CsvTable derive_exp13_table(const fs::path& run_dir) {
  CsvTable t;
  t.header = {"init", "step", "secondary_accuracy"};
  for (const char* init : {"pretrained", "random"}) {
    const CsvTable m = read_csv(run_dir / (std::string("exp13_finetune_") + init) / "metrics.csv");
    const int c_step = m.column("step"), c_split = m.column("split"), c_task = m.column("task"),
              c_metric = m.column("metric"), c_value = m.column("value");
    for (const auto& r : m.rows)
      if (r[static_cast<size_t>(c_split)] == "val" && r[static_cast<size_t>(c_task)] == "secondary" &&
          r[static_cast<size_t>(c_metric)] == "accuracy")
        t.rows.push_back({init, r[static_cast<size_t>(c_step)], r[static_cast<size_t>(c_value)]});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Experiment 1: lambda sweep plus the pretrain-then-finetune probe
// ---------------------------------------------------------------------------

struct TrainRunResult {
  TrainOutcome outcome;
  bool failed = false;
  std::string error;
};

/// Train one configuration into run_dir (metrics.csv + best/final checkpoints).
inline TrainRunResult run_training(const ExperimentConfig& cfg, const PreparedData& data,
                                   const TrainingConfig& tcfg, const fs::path& run_dir,
                                   ModelBundle<float>* model_in = nullptr) {
  fs::create_directories(run_dir);
  std::unique_ptr<ModelBundle<float>> owned;
  ModelBundle<float>* model = model_in;
  if (!model) {
    ModelConfig mc = cfg.model;
    owned = build_model<float>(mc);
    model = owned.get();
  }
  MetricLog log;
  TrainRunResult result;
  try {
    result.outcome = train(*model, data.train(), data.val(), tcfg, cfg.augment,
                           derive_seed(cfg.seed, "train"), log);
  } catch (const TrainingDiverged& e) {
    result.failed = true;
    result.error = e.what();
  }
  log.write_csv(run_dir / "metrics.csv");
  if (!result.failed) {
    model->restore(result.outcome.best_snapshot);
    save_checkpoint(*model, run_dir / "checkpoints" / "best", result.outcome.best_step, cfg.seed);
    model->restore(result.outcome.final_snapshot);
    save_checkpoint(*model, run_dir / "checkpoints" / "final", result.outcome.steps_run, cfg.seed);
  }
  return result;
}

/// Lambda sweep (one training per grid point; the 0 row runs in vanilla mode)
/// plus the pretrain-secondary vs random-init fine-tuning comparison.
/// Per-run failures are recorded and the sweep continues.
inline void run_experiment1(const ExperimentConfig& cfg, const fs::path& run_dir) {
  cfg.validate();
  fs::create_directories(run_dir);
  const PreparedData data = prepare_data(cfg);
  const std::vector<double> grid = cfg.lambda_grid_for(cfg.model.task);

  std::vector<std::string> failures;
  for (double lambda : grid) {
    TrainingConfig tcfg = cfg.training;
    tcfg.lambda_s = lambda;
    tcfg.mode = lambda == 0.0 ? TrainMode::vanilla : TrainMode::joint;
    const auto r = run_training(cfg, data, tcfg, run_dir / lambda_dir_name(lambda));
    if (r.failed) failures.push_back(lambda_dir_name(lambda) + ": " + r.error);
  }

  // Exp 1.3 probe, always on the resolution-sequence setup.
  ExperimentConfig probe_cfg = cfg;
  probe_cfg.model.task = TaskKind::rsp;
  {
    auto model = build_model<float>(probe_cfg.model);
    TrainingConfig pre = cfg.training;
    pre.mode = TrainMode::pretrain_secondary;
    const auto r = run_training(probe_cfg, data, pre, run_dir / "exp13_pretrain", model.get());
    if (r.failed) failures.push_back("exp13_pretrain: " + r.error);

    TrainingConfig fin = cfg.training;
    fin.mode = TrainMode::finetune_primary;
    fin.lambda_s = 0.0;
    if (!r.failed) {
      // fine-tune from the pretrained final parameters
      const auto r2 =
          run_training(probe_cfg, data, fin, run_dir / "exp13_finetune_pretrained", model.get());
      if (r2.failed) failures.push_back("exp13_finetune_pretrained: " + r2.error);
    }
    auto random_model = build_model<float>(probe_cfg.model);
    const auto r3 =
        run_training(probe_cfg, data, fin, run_dir / "exp13_finetune_random", random_model.get());
    if (r3.failed) failures.push_back("exp13_finetune_random: " + r3.error);
  }

  write_csv(run_dir / "lambda_sweep.csv", derive_lambda_table(run_dir, grid));
  write_csv(run_dir / "exp13_secondary_accuracy.csv", derive_exp13_table(run_dir));
  if (!failures.empty()) {
    std::string text;
    for (const auto& f : failures) text += f + "\n";
    write_text_file(run_dir / "failures.txt", text);
  }
}

// ---------------------------------------------------------------------------
// Experiment 2: step-size sweep over the three test settings
// ---------------------------------------------------------------------------

inline void append_jsonl(std::ofstream& out, const EpisodeAudit& audit, const std::string& shift,
                         double eta) {
  Json j = audit.to_json();
  j["shift"] = shift;
  j["eta"] = eta;
  out << j.dump() << "\n";
}

/// Evaluate TTT over shift x step-size; eta = 0 rows coincide with the
/// unadapted baseline by the episodic-reset contract.
inline void run_experiment2(const ExperimentConfig& cfg, const fs::path& run_dir) {
  cfg.validate();
  fs::create_directories(run_dir);
  const PreparedData data = prepare_data(cfg);

  std::unique_ptr<ModelBundle<float>> model;
  if (!cfg.checkpoint.empty()) {
    model = load_checkpoint(cfg.checkpoint).model;
  } else {
    ExperimentConfig joint_cfg = cfg;
    joint_cfg.model.task = TaskKind::simclr;
    TrainingConfig tcfg = cfg.training;
    tcfg.mode = tcfg.lambda_s == 0.0 ? TrainMode::vanilla : TrainMode::joint;
    auto owned = build_model<float>(joint_cfg.model);
    const auto r = run_training(joint_cfg, data, tcfg, run_dir / "joint_training", owned.get());
    if (r.failed) throw std::runtime_error("experiment2: joint training diverged: " + r.error);
    owned->restore(r.outcome.best_snapshot);
    model = std::move(owned);
  }

  std::ofstream episodes(run_dir / "episodes.jsonl", std::ios::binary);

  CsvTable baseline;
  baseline.header = {"shift", "accuracy", "primary_loss"};
  for (const auto& shift : cfg.shifts) {
    AdaptConfig none = cfg.adapt;
    none.method = AdaptConfig::Method::none;
    const auto r = evaluate_with_adaptation(*model, data.test_a(), shift, none, cfg.augment,
                                            derive_seed(cfg.seed, "eval"));
    baseline.rows.push_back({shift.id, format_value(r.accuracy), format_value(r.primary_loss)});
  }
  write_csv(run_dir / "baseline.csv", baseline);

  CsvTable sweep;
  sweep.header = {"shift", "eta", "accuracy", "primary_loss"};
  for (const auto& shift : cfg.shifts)
    for (double eta : cfg.eta_grid) {
      AdaptConfig acfg = cfg.adapt;
      acfg.method = AdaptConfig::Method::ttt;
      acfg.step_size = eta;
      const auto r = evaluate_with_adaptation(*model, data.test_a(), shift, acfg, cfg.augment,
                                              derive_seed(cfg.seed, "eval"));
      char eta_s[40];
      std::snprintf(eta_s, sizeof(eta_s), "%g", eta);
      sweep.rows.push_back({shift.id, eta_s, format_value(r.accuracy), format_value(r.primary_loss)});
      for (const auto& a : r.episodes) append_jsonl(episodes, a, shift.id, eta);
    }
  write_csv(run_dir / "step_size_sweep.csv", sweep);
}

// ---------------------------------------------------------------------------
// Single adaptation evaluation (the adapt-eval subcommand)
// ---------------------------------------------------------------------------

inline void run_adapt_eval(const ExperimentConfig& cfg, const fs::path& run_dir,
                           const std::string& shift_id) {
  cfg.validate();
  if (cfg.checkpoint.empty()) throw UsageError("adapt-eval: config must name a checkpoint");
  fs::create_directories(run_dir);
  const PreparedData data = prepare_data(cfg);
  auto model = load_checkpoint(cfg.checkpoint).model;

  const ShiftSpec* shift = nullptr;
  for (const auto& s : cfg.shifts)
    if (s.id == shift_id || shift_id.empty()) {
      shift = &s;
      break;
    }
  if (!shift) throw UsageError("adapt-eval: shift id not found in config: " + shift_id);

  const auto r = evaluate_with_adaptation(*model, data.test_a(), *shift, cfg.adapt, cfg.augment,
                                          derive_seed(cfg.seed, "eval"));

  CsvTable metrics;
  metrics.header = {"method", "shift", "eta", "n_steps", "metric", "value"};
  char eta_s[40];
  std::snprintf(eta_s, sizeof(eta_s), "%g", cfg.adapt.step_size);
  const std::string method = AdaptConfig::method_name(cfg.adapt.method);
  metrics.rows.push_back({method, shift->id, eta_s, std::to_string(cfg.adapt.n_steps), "accuracy",
                          format_value(r.accuracy)});
  metrics.rows.push_back({method, shift->id, eta_s, std::to_string(cfg.adapt.n_steps), "loss",
                          format_value(r.primary_loss)});
  write_csv(run_dir / "adapt_metrics.csv", metrics);

  std::ofstream episodes(run_dir / "episodes.jsonl", std::ios::binary);
  for (const auto& a : r.episodes) append_jsonl(episodes, a, shift->id, cfg.adapt.step_size);
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

/// Re-derive every table a run directory supports (byte-stable across
/// reruns), optionally rendering plots. Plot failures never corrupt tables.
inline void emit_report(const fs::path& run_dir, bool plots = false) {
  const fs::path report = run_dir / "report";
  fs::create_directories(report);
  bool produced = false;

  // lambda sweep
  std::vector<double> grid;
  {
    std::map<double, fs::path> found;
    if (fs::exists(run_dir))
      for (const auto& e : fs::directory_iterator(run_dir)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("lambda_", 0) == 0 && fs::exists(e.path() / "metrics.csv"))
          found[std::stod(name.substr(7))] = e.path();
      }
    for (const auto& [lambda, p] : found) grid.push_back(lambda);
    if (!grid.empty()) {
      const CsvTable t = derive_lambda_table(run_dir, grid);
      write_csv(report / "lambda_sweep.csv", t);
      produced = true;
      if (plots) {
        try {
          plot::Series loss;
          loss.name = "VAL PRIMARY";
          for (size_t i = 0; i < t.rows.size(); ++i) {
            loss.xs.push_back(static_cast<double>(i));
            loss.ys.push_back(std::stod(t.rows[i][1]));
          }
          loss.color = plot::palette()[0];
          plot::render_chart((report / "lambda_sweep.png").string(), "BEST VAL PRIMARY LOSS VS LAMBDA",
                             {loss}, "LAMBDA GRID INDEX", "LOSS");
        } catch (const std::exception& e) {
          std::cerr << "plot failed (lambda_sweep): " << e.what() << "\n";
        }
      }
    }
  }

  // exp 1.3 curves
  if (fs::exists(run_dir / "exp13_finetune_pretrained" / "metrics.csv") &&
      fs::exists(run_dir / "exp13_finetune_random" / "metrics.csv")) {
    const CsvTable t = derive_exp13_table(run_dir);
    write_csv(report / "exp13_secondary_accuracy.csv", t);
    produced = true;
    if (plots) {
      try {
        std::vector<plot::Series> series(2);
        series[0].name = "PRETRAINED";
        series[0].color = plot::palette()[0];
        series[1].name = "RANDOM";
        series[1].color = plot::palette()[1];
        for (const auto& r : t.rows) {
          const int idx = r[0] == "pretrained" ? 0 : 1;
          series[static_cast<size_t>(idx)].xs.push_back(std::stod(r[1]));
          series[static_cast<size_t>(idx)].ys.push_back(std::stod(r[2]));
        }
        plot::render_chart((report / "exp13_secondary_accuracy.png").string(),
                           "VAL SECONDARY ACCURACY DURING FINE-TUNING", series, "STEP", "ACCURACY");
      } catch (const std::exception& e) {
        std::cerr << "plot failed (exp13): " << e.what() << "\n";
      }
    }
  }

  // step-size sweep
  if (fs::exists(run_dir / "step_size_sweep.csv")) {
    const CsvTable t = read_csv(run_dir / "step_size_sweep.csv");
    write_csv(report / "step_size_sweep.csv", t);
    produced = true;
    if (plots) {
      try {
        const int c_shift = t.column("shift"), c_acc = t.column("accuracy"),
                  c_loss = t.column("primary_loss");
        std::vector<std::string> shifts;
        for (const auto& r : t.rows)
          if (std::find(shifts.begin(), shifts.end(), r[static_cast<size_t>(c_shift)]) == shifts.end())
            shifts.push_back(r[static_cast<size_t>(c_shift)]);
        for (const auto& shift : shifts) {
          plot::Series acc, loss;
          acc.name = "ACCURACY";
          acc.color = plot::palette()[2];
          loss.name = "LOSS";
          loss.color = plot::palette()[3];
          int i = 0;
          for (const auto& r : t.rows)
            if (r[static_cast<size_t>(c_shift)] == shift) {
              acc.xs.push_back(i);
              acc.ys.push_back(std::stod(r[static_cast<size_t>(c_acc)]));
              loss.xs.push_back(i);
              loss.ys.push_back(std::stod(r[static_cast<size_t>(c_loss)]));
              ++i;
            }
          plot::render_chart((report / ("step_size_sweep_" + shift + ".png")).string(),
                             "TTT STEP-SIZE SWEEP: " + shift, {acc, loss}, "ETA GRID INDEX", "VALUE");
        }
      } catch (const std::exception& e) {
        std::cerr << "plot failed (step_size_sweep): " << e.what() << "\n";
      }
    }
  }

  // plain training run
  if (fs::exists(run_dir / "metrics.csv")) {
    const auto [best, secondary] = best_primary_with_secondary(run_dir / "metrics.csv");
    CsvTable t;
    t.header = {"best_val_primary_loss", "val_secondary_loss"};
    t.rows.push_back({format_value(best), format_value(secondary)});
    write_csv(report / "training_summary.csv", t);
    produced = true;
    if (plots) {
      try {
        const CsvTable m = read_csv(run_dir / "metrics.csv");
        const int c_step = m.column("step"), c_split = m.column("split"), c_task = m.column("task"),
                  c_metric = m.column("metric"), c_value = m.column("value");
        plot::Series p, s;
        p.name = "VAL PRIMARY";
        p.color = plot::palette()[0];
        s.name = "VAL SECONDARY";
        s.color = plot::palette()[1];
        for (const auto& r : m.rows) {
          if (r[static_cast<size_t>(c_split)] != "val" || r[static_cast<size_t>(c_metric)] != "loss") continue;
          auto& series = r[static_cast<size_t>(c_task)] == "primary" ? p : s;
          series.xs.push_back(std::stod(r[static_cast<size_t>(c_step)]));
          series.ys.push_back(std::stod(r[static_cast<size_t>(c_value)]));
        }
        std::vector<plot::Series> all;
        if (!p.xs.empty()) all.push_back(p);
        if (!s.xs.empty()) all.push_back(s);
        plot::render_chart((report / "training_curves.png").string(), "VALIDATION LOSS", all, "STEP",
                           "LOSS");
      } catch (const std::exception& e) {
        std::cerr << "plot failed (training curves): " << e.what() << "\n";
      }
    }
  }

  if (fs::exists(run_dir / "adapt_metrics.csv")) {
    write_csv(report / "adapt_metrics.csv", read_csv(run_dir / "adapt_metrics.csv"));
    produced = true;
  }

  if (!produced) throw UsageError("report: no reportable artifacts in " + run_dir.string());
}

}  // namespace tta
