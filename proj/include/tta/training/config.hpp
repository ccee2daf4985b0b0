#pragma once

#include <cmath>
#include <string>

#include "tta/core/errors.hpp"
#include "tta/io/json_strict.hpp"
#include "tta/model/config.hpp"

namespace tta {

enum class TrainMode { joint, vanilla, pretrain_secondary, finetune_primary };

inline const char* train_mode_name(TrainMode m) {
  switch (m) {
    case TrainMode::joint: return "joint";
    case TrainMode::vanilla: return "vanilla";
    case TrainMode::pretrain_secondary: return "pretrain_secondary";
    case TrainMode::finetune_primary: return "finetune_primary";
  }
  return "?";
}

inline TrainMode train_mode_from_name(const std::string& s) {
  if (s == "joint") return TrainMode::joint;
  if (s == "vanilla") return TrainMode::vanilla;
  if (s == "pretrain_secondary") return TrainMode::pretrain_secondary;
  if (s == "finetune_primary") return TrainMode::finetune_primary;
  throw UsageError("unknown training mode: " + s);
}

struct TrainingConfig {
  double lambda_s = 0.01;  // secondary-task weight in [0, 1]
  int steps = 2000;        // desk-scale default; full-scale runs use 10000/20000
  int batch_size = 24;
  double lr = 0.001;
  double lr_gamma = 0.5;
  int lr_period = 5000;
  int log_period = 250;
  int val_steps = 120;  // validation batches per log point, at training batch size
  TrainMode mode = TrainMode::joint;

  void validate() const {
    if (lambda_s < 0.0 || lambda_s > 1.0) throw UsageError("training: lambda_s must be in [0, 1]");
    if (steps < 1) throw UsageError("training: steps must be positive");
    if (batch_size < 3 || batch_size % 3 != 0)
      throw UsageError("training: batch_size must be a positive multiple of 3");
    if (lr <= 0) throw UsageError("training: lr must be positive");
    if (lr_period <= 0 || log_period <= 0) throw UsageError("training: periods must be positive");
    if (val_steps < 1) throw UsageError("training: val_steps must be positive");
  }

  Json to_json() const {
    Json j;
    j["lambda_s"] = lambda_s;
    j["steps"] = steps;
    j["batch_size"] = batch_size;
    j["lr"] = lr;
    j["lr_gamma"] = lr_gamma;
    j["lr_period"] = lr_period;
    j["log_period"] = log_period;
    j["val_steps"] = val_steps;
    j["mode"] = train_mode_name(mode);
    return j;
  }
  static TrainingConfig from_json(const Json& j, const std::string& path) {
    StrictObject o(j, path);
    TrainingConfig c;
    c.lambda_s = o.get_or<double>("lambda_s", c.lambda_s);
    c.steps = o.get_or<int>("steps", c.steps);
    c.batch_size = o.get_or<int>("batch_size", c.batch_size);
    c.lr = o.get_or<double>("lr", c.lr);
    c.lr_gamma = o.get_or<double>("lr_gamma", c.lr_gamma);
    c.lr_period = o.get_or<int>("lr_period", c.lr_period);
    c.log_period = o.get_or<int>("log_period", c.log_period);
    c.val_steps = o.get_or<int>("val_steps", c.val_steps);
    c.mode = train_mode_from_name(o.get_or<std::string>("mode", train_mode_name(c.mode)));
    o.done();
    c.validate();
    return c;
  }
};

/// Step-decayed learning rate: lr * gamma^floor(step / period).
inline double lr_at(long step, const TrainingConfig& cfg) {
  if (step < 0) throw std::invalid_argument("lr_at: negative step");
  return cfg.lr * std::pow(cfg.lr_gamma, static_cast<double>(step / cfg.lr_period));
}

/// The weighted combined objective: (1 - lambda) * primary + lambda * secondary.
inline double joint_loss(double primary, double secondary, double lambda_s) {
  if (!(lambda_s >= 0.0 && lambda_s <= 1.0))
    throw std::invalid_argument("joint_loss: lambda_s outside [0, 1]");
  if (!std::isfinite(primary) || !std::isfinite(secondary))
    throw std::invalid_argument("joint_loss: non-finite task loss");
  return (1.0 - lambda_s) * primary + lambda_s * secondary;
}

}  // namespace tta
