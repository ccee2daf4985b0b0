#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tta/adapt/adapt.hpp"
#include "tta/data/dataset.hpp"
#include "tta/data/synthetic.hpp"
#include "tta/model/config.hpp"
#include "tta/shifts/shift.hpp"
#include "tta/tasks/augment.hpp"
#include "tta/training/config.hpp"

namespace tta {

/// The whole experiment document. Serializable both ways; unknown keys are
/// hard errors. A run directory always contains the exact config used.
struct ExperimentConfig {
  std::uint64_t seed = 7;
  DataConfig data;
  SplitSpec split;
  ModelConfig model;
  TrainingConfig training;
  AugmentationConfig augment;
  AdaptConfig adapt;
  std::vector<ShiftSpec> shifts;     // evaluation settings (experiment 2)
  std::vector<double> lambda_grid;   // empty -> per-task default
  std::vector<double> eta_grid = {0.0, 1e-4, 1e-3, 1e-2, 1e-1};
  std::string corpus_dir;    // reuse an existing corpus instead of generating
  std::string checkpoint;    // joint-trained checkpoint for adaptation runs

  ExperimentConfig() {
    shifts.push_back(ShiftSpec::identity());
    shifts.push_back(ShiftSpec::gaussian_noise(0.1));
    shifts.push_back(ShiftSpec::scanner_from_seed(1234));
  }

  std::vector<double> lambda_grid_for(TaskKind task) const {
    if (!lambda_grid.empty()) return lambda_grid;
    if (task == TaskKind::rsp) return {0.0, 1e-4, 1e-3, 1e-2, 1e-1};
    return {0.0, 1e-3, 1e-2, 5e-2};
  }

  void validate() const {
    data.validate();
    split.validate();
    model.validate();
    training.validate();
    adapt.validate();
    augment.primary.validate();
    augment.simclr.validate();
    for (const auto& s : shifts) s.validate();
    for (double e : eta_grid)
      if (e < 0) throw UsageError("config: eta grid values must be >= 0");
    for (double l : lambda_grid)
      if (l < 0 || l > 1) throw UsageError("config: lambda grid values must be in [0, 1]");
    if (model.image_size != data.patch_size)
      throw UsageError("config: model.image_size must equal data.patch_size");
  }

  Json to_json() const {
    Json j;
    j["seed"] = seed;
    j["data"] = data.to_json();
    j["split"] = split.to_json();
    j["model"] = model.to_json();
    j["training"] = training.to_json();
    j["augment"] = augment.to_json();
    j["adapt"] = adapt.to_json();
    Json sh = Json::array();
    for (const auto& s : shifts) sh.push_back(s.to_json());
    j["shifts"] = sh;
    if (!lambda_grid.empty()) j["lambda_grid"] = lambda_grid;
    j["eta_grid"] = eta_grid;
    if (!corpus_dir.empty()) j["corpus_dir"] = corpus_dir;
    if (!checkpoint.empty()) j["checkpoint"] = checkpoint;
    return j;
  }

  static ExperimentConfig from_json(const Json& j) {
    StrictObject o(j, "");
    ExperimentConfig c;
    c.seed = o.get_or<std::uint64_t>("seed", c.seed);
    if (o.has_child("data")) c.data = DataConfig::from_json(o.raw("data"), "data");
    if (o.has_child("split")) c.split = SplitSpec::from_json(o.raw("split"), "split");
    if (o.has_child("model")) c.model = ModelConfig::from_json(o.raw("model"), "model");
    if (o.has_child("training")) c.training = TrainingConfig::from_json(o.raw("training"), "training");
    if (o.has_child("augment")) c.augment = AugmentationConfig::from_json(o.raw("augment"), "augment");
    if (o.has_child("adapt")) c.adapt = AdaptConfig::from_json(o.raw("adapt"), "adapt");
    if (o.has("shifts")) {
      c.shifts.clear();
      int i = 0;
      for (const auto& s : o.array("shifts"))
        c.shifts.push_back(ShiftSpec::from_json(s, "shifts[" + std::to_string(i++) + "]"));
    }
    c.lambda_grid = o.get_or<std::vector<double>>("lambda_grid", c.lambda_grid);
    c.eta_grid = o.get_or<std::vector<double>>("eta_grid", c.eta_grid);
    c.corpus_dir = o.get_or<std::string>("corpus_dir", c.corpus_dir);
    c.checkpoint = o.get_or<std::string>("checkpoint", c.checkpoint);
    o.done();
    c.validate();
    return c;
  }
};

}  // namespace tta
