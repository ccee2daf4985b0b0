// tta: command-line harness for joint training and test-time adaptation
// experiments on the synthetic multi-resolution corpus.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <iostream>

#include "tta/harness/experiment.hpp"

namespace {

using namespace tta;

std::string timestamp_name(const std::string& prefix) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s-%04d%02d%02d-%02d%02d%02d", prefix.c_str(), tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "runs";
  std::string run_name;
  std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* c = cmd->add_option("--config", args.config_path, "experiment config JSON");
  if (config_required) c->required();
  cmd->add_option("--out", args.out_dir, "output directory (run directory is created inside)");
  cmd->add_option("--run-name", args.run_name, "run directory name (default: timestamped)");
  cmd->add_option("--seed", args.seed, "override the global seed");
}

ExperimentConfig load_config(const CommonArgs& args) {
  ExperimentConfig cfg;
  if (!args.config_path.empty()) {
    if (!fs::exists(args.config_path)) throw UsageError("config file not found: " + args.config_path);
    Json j;
    try {
      j = Json::parse(read_text_file(args.config_path));
    } catch (const Json::exception& e) {
      throw UsageError(std::string("config: invalid JSON: ") + e.what());
    }
    cfg = ExperimentConfig::from_json(j);
  }
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  return cfg;
}

fs::path make_run_dir(const CommonArgs& args, const std::string& prefix, const ExperimentConfig& cfg) {
  const std::string name = args.run_name.empty() ? timestamp_name(prefix) : args.run_name;
  const fs::path dir = fs::path(args.out_dir) / name;
  if (fs::exists(dir)) throw UsageError("run directory already exists: " + dir.string());
  fs::create_directories(dir);
  write_text_file(dir / "config.json", cfg.to_json().dump(2) + "\n");
  return dir;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"test-time adaptation experiment harness"};
  app.require_subcommand(1);

  // gen-data
  CommonArgs gen_args;
  auto* gen = app.add_subcommand("gen-data", "generate the synthetic slide corpus");
  add_common(gen, gen_args);

  // train
  CommonArgs train_args;
  double train_lambda = -1.0;
  std::string train_task, train_mode;
  auto* tr = app.add_subcommand("train", "single training run");
  add_common(tr, train_args);
  tr->add_option("--lambda-s", train_lambda, "override training.lambda_s");
  tr->add_option("--task", train_task, "override model.task (rsp|simclr)");
  tr->add_option("--mode", train_mode, "override training.mode");

  // sweep-lambda
  CommonArgs sl_args;
  auto* sl = app.add_subcommand("sweep-lambda",
                                "experiment 1: lambda sweep plus the pretrain/finetune probe");
  add_common(sl, sl_args);

  // adapt-eval
  CommonArgs ae_args;
  std::string ae_method, ae_shift;
  double ae_step = -1.0;
  auto* ae = app.add_subcommand("adapt-eval", "one adaptation evaluation on the test split");
  add_common(ae, ae_args);
  ae->add_option("--method", ae_method, "override adapt.method (none|ttt|adabn|tent|memo)");
  ae->add_option("--step-size", ae_step, "override adapt.step_size");
  ae->add_option("--shift", ae_shift, "shift id from the config's shift list");

  // sweep-step-size
  CommonArgs ss_args;
  auto* ss = app.add_subcommand("sweep-step-size",
                                "experiment 2: TTT step-size sweep over the configured shifts");
  add_common(ss, ss_args);

  // report
  std::string report_run;
  bool report_plots = false;
  auto* rp = app.add_subcommand("report", "derive tables (and optional plots) from a run directory");
  rp->add_option("--run", report_run, "run directory")->required();
  rp->add_flag("--plots", report_plots, "also render PNG charts");

  // export-weights
  std::string exp_checkpoint, exp_out;
  auto* ew = app.add_subcommand("export-weights",
                                "re-emit a checkpoint's parameter store (index.json + weights.bin)");
  ew->add_option("--checkpoint", exp_checkpoint, "checkpoint directory")->required();
  ew->add_option("--out", exp_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (gen->parsed()) {
    const ExperimentConfig cfg = load_config(gen_args);
    const fs::path dir = make_run_dir(gen_args, "gen-data", cfg);
    const auto slides = generate_synthetic_dataset(cfg.data, derive_seed(cfg.seed, "data"));
    save_corpus(dir / "corpus", slides, cfg.data, cfg.seed);
    std::cout << "corpus written to " << (dir / "corpus").string() << "\n";
  } else if (tr->parsed()) {
    ExperimentConfig cfg = load_config(train_args);
    if (train_lambda >= 0) cfg.training.lambda_s = train_lambda;
    if (!train_task.empty()) cfg.model.task = task_from_name(train_task);
    if (!train_mode.empty()) cfg.training.mode = train_mode_from_name(train_mode);
    cfg.validate();
    const fs::path dir = make_run_dir(train_args, "train", cfg);
    const PreparedData data = prepare_data(cfg);
    const auto result = run_training(cfg, data, cfg.training, dir);
    if (result.failed) throw std::runtime_error("training failed: " + result.error);
    std::cout << "best val primary loss " << format_value(result.outcome.best_val_primary) << " at step "
              << result.outcome.best_step << "; run directory " << dir.string() << "\n";
  } else if (sl->parsed()) {
    const ExperimentConfig cfg = load_config(sl_args);
    const fs::path dir = make_run_dir(sl_args, "sweep-lambda", cfg);
    run_experiment1(cfg, dir);
    std::cout << "lambda sweep written to " << dir.string() << "\n";
  } else if (ae->parsed()) {
    ExperimentConfig cfg = load_config(ae_args);
    if (!ae_method.empty()) cfg.adapt.method = AdaptConfig::method_from_name(ae_method);
    if (ae_step >= 0) cfg.adapt.step_size = ae_step;
    const fs::path dir = make_run_dir(ae_args, "adapt-eval", cfg);
    run_adapt_eval(cfg, dir, ae_shift);
    std::cout << "adaptation metrics written to " << dir.string() << "\n";
  } else if (ss->parsed()) {
    const ExperimentConfig cfg = load_config(ss_args);
    const fs::path dir = make_run_dir(ss_args, "sweep-step-size", cfg);
    run_experiment2(cfg, dir);
    std::cout << "step-size sweep written to " << dir.string() << "\n";
  } else if (rp->parsed()) {
    if (!fs::exists(report_run)) throw UsageError("run directory not found: " + report_run);
    emit_report(report_run, report_plots);
    std::cout << "report written to " << (fs::path(report_run) / "report").string() << "\n";
  } else if (ew->parsed()) {
    if (!fs::exists(exp_checkpoint)) throw UsageError("checkpoint not found: " + exp_checkpoint);
    auto loaded = load_checkpoint(exp_checkpoint);
    export_weights(*loaded.model, exp_out);
    std::cout << "parameter store written to " << exp_out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const tta::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
