#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tta/core/errors.hpp"
#include "tta/io/json_strict.hpp"

namespace tta {

enum class TaskKind { rsp, simclr };

inline const char* task_name(TaskKind t) { return t == TaskKind::rsp ? "rsp" : "simclr"; }

inline TaskKind task_from_name(const std::string& s) {
  if (s == "rsp") return TaskKind::rsp;
  if (s == "simclr") return TaskKind::simclr;
  throw UsageError("unknown task kind: " + s);
}

struct ModelConfig {
  int image_size = 64;  // full-scale 526x526 inputs are accepted too
  int latent_dim = 512;
  std::vector<int> channels = {16, 32, 64, 128};  // one conv block per entry
  TaskKind task = TaskKind::rsp;
  int proj_hidden = 256;
  int proj_dim = 128;
  int rsp_pair_hidden = 256;
  int rsp_pair_out = 256;
  int rsp_cls_hidden = 256;
  std::uint64_t seed = 0;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;

  int min_image_size() const { return 1 << static_cast<int>(channels.size()); }

  void validate() const {
    if (latent_dim <= 0) throw UsageError("model: latent_dim must be positive");
    if (channels.empty()) throw UsageError("model: channels must be non-empty");
    for (int c : channels)
      if (c <= 0) throw UsageError("model: channel widths must be positive");
    if (image_size < min_image_size())
      throw UsageError("model: image_size " + std::to_string(image_size) +
                       " below the encoder's minimum of " + std::to_string(min_image_size()));
    if (proj_hidden <= 0 || proj_dim <= 0 || rsp_pair_hidden <= 0 || rsp_pair_out <= 0 ||
        rsp_cls_hidden <= 0)
      throw UsageError("model: head widths must be positive");
  }

  Json to_json() const {
    Json j;
    j["image_size"] = image_size;
    j["latent_dim"] = latent_dim;
    j["channels"] = channels;
    j["task"] = task_name(task);
    j["proj_hidden"] = proj_hidden;
    j["proj_dim"] = proj_dim;
    j["rsp_pair_hidden"] = rsp_pair_hidden;
    j["rsp_pair_out"] = rsp_pair_out;
    j["rsp_cls_hidden"] = rsp_cls_hidden;
    j["seed"] = seed;
    j["bn_momentum"] = bn_momentum;
    j["bn_eps"] = bn_eps;
    return j;
  }

  static ModelConfig from_json(const Json& j, const std::string& path) {
    StrictObject o(j, path);
    ModelConfig c;
    c.image_size = o.get_or<int>("image_size", c.image_size);
    c.latent_dim = o.get_or<int>("latent_dim", c.latent_dim);
    c.channels = o.get_or<std::vector<int>>("channels", c.channels);
    c.task = task_from_name(o.get_or<std::string>("task", task_name(c.task)));
    c.proj_hidden = o.get_or<int>("proj_hidden", c.proj_hidden);
    c.proj_dim = o.get_or<int>("proj_dim", c.proj_dim);
    c.rsp_pair_hidden = o.get_or<int>("rsp_pair_hidden", c.rsp_pair_hidden);
    c.rsp_pair_out = o.get_or<int>("rsp_pair_out", c.rsp_pair_out);
    c.rsp_cls_hidden = o.get_or<int>("rsp_cls_hidden", c.rsp_cls_hidden);
    c.seed = o.get_or<std::uint64_t>("seed", c.seed);
    c.bn_momentum = o.get_or<double>("bn_momentum", c.bn_momentum);
    c.bn_eps = o.get_or<double>("bn_eps", c.bn_eps);
    o.done();
    c.validate();
    return c;
  }
};

}  // namespace tta
