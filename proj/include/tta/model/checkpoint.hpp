#pragma once

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "tta/data/corpus_io.hpp"
#include "tta/model/bundle.hpp"

namespace tta {

// Checkpoint directory layout:
//   manifest.json : architecture config, training step, seeds, role-tag map
//   index.json    : name -> { shape, offset_bytes } into weights.bin
//   weights.bin   : concatenated little-endian float32 arrays
// The parameter store is the portable export format itself, so any
// implementation can reload another's checkpoint.

inline constexpr const char* kCheckpointFormat = "tta-checkpoint-v1";

namespace detail {

inline void append_f32_le(std::vector<std::uint8_t>& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  if constexpr (std::endian::native == std::endian::big) {
    bits = ((bits & 0xff) << 24) | ((bits & 0xff00) << 8) | ((bits >> 8) & 0xff00) | (bits >> 24);
  }
  out.push_back(static_cast<std::uint8_t>(bits));
  out.push_back(static_cast<std::uint8_t>(bits >> 8));
  out.push_back(static_cast<std::uint8_t>(bits >> 16));
  out.push_back(static_cast<std::uint8_t>(bits >> 24));
}

inline float read_f32_le(const std::uint8_t* p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace detail

/// Write the parameter store (index.json + weights.bin) for a model.
inline void export_weights(ModelBundle<float>& model, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<std::uint8_t> blob;
  Json index;
  index["dtype"] = "float32";
  index["byte_order"] = "little";
  Json params = Json::object();
  for (const auto* p : model.params()) {
    Json entry;
    entry["shape"] = p->value.shape;
    entry["offset_bytes"] = blob.size();
    params[p->name] = entry;
    for (float v : p->value.v) detail::append_f32_le(blob, v);
  }
  index["params"] = params;
  write_text_file(dir / "index.json", index.dump(2) + "\n");
  std::ofstream f(dir / "weights.bin", std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + (dir / "weights.bin").string());
  f.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
}

/// Load parameter values by name from an exported store. Shapes must match.
inline void import_weights(ModelBundle<float>& model, const fs::path& dir) {
  const Json index = Json::parse(read_text_file(dir / "index.json"));
  StrictObject o(index, "index");
  if (o.get<std::string>("dtype") != "float32" || o.get<std::string>("byte_order") != "little")
    throw UsageError("checkpoint: unsupported parameter store encoding");
  const Json& params = o.raw("params");
  o.done();

  std::ifstream f(dir / "weights.bin", std::ios::binary);
  if (!f) throw UsageError("checkpoint: cannot open " + (dir / "weights.bin").string());
  std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  for (auto* p : model.params()) {
    if (!params.contains(p->name)) throw UsageError("checkpoint: missing parameter " + p->name);
    StrictObject e(params.at(p->name), "index." + p->name);
    const auto shape = e.get<std::vector<int>>("shape");
    const auto offset = e.get<std::uint64_t>("offset_bytes");
    e.done();
    if (shape != p->value.shape)
      throw UsageError("checkpoint: shape mismatch for " + p->name);
    const std::uint64_t need = offset + 4ull * static_cast<std::uint64_t>(p->value.size());
    if (need > blob.size()) throw UsageError("checkpoint: truncated weights.bin");
    for (std::int64_t i = 0; i < p->value.size(); ++i)
      p->value[i] = detail::read_f32_le(blob.data() + offset + 4ull * static_cast<std::uint64_t>(i));
  }
}

inline void save_checkpoint(ModelBundle<float>& model, const fs::path& dir, long training_step,
                            std::uint64_t global_seed) {
  fs::create_directories(dir);
  Json manifest;
  manifest["format"] = kCheckpointFormat;
  manifest["model"] = model.config().to_json();
  manifest["training_step"] = training_step;
  manifest["seeds"] = Json{{"global", global_seed}, {"model", model.config().seed}};
  Json roles = Json::object();
  for (const auto* p : model.params())
    roles[p->name] = Json{{"role", role_name(p->role)}, {"affine", p->affine}, {"bn_stat", p->bn_stat}};
  manifest["roles"] = roles;
  Digest d;
  d.update_pod(model.digest());
  manifest["param_digest"] = d.hex();
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
  export_weights(model, dir);
}

struct LoadedCheckpoint {
  std::unique_ptr<ModelBundle<float>> model;
  long training_step = 0;
  std::uint64_t global_seed = 0;
};

inline LoadedCheckpoint load_checkpoint(const fs::path& dir) {
  const Json manifest = Json::parse(read_text_file(dir / "manifest.json"));
  StrictObject o(manifest, "manifest");
  if (o.get<std::string>("format") != kCheckpointFormat)
    throw UsageError("checkpoint: unknown format in " + dir.string());
  LoadedCheckpoint out;
  const ModelConfig cfg = ModelConfig::from_json(o.raw("model"), "manifest.model");
  out.training_step = o.get<long>("training_step");
  {
    StrictObject seeds(o.raw("seeds"), "manifest.seeds");
    out.global_seed = seeds.get<std::uint64_t>("global");
    seeds.get<std::uint64_t>("model");
    seeds.done();
  }
  o.raw("roles");
  const std::string want_digest = o.get<std::string>("param_digest");
  o.done();

  out.model = build_model<float>(cfg);
  import_weights(*out.model, dir);
  Digest d;
  d.update_pod(out.model->digest());
  if (d.hex() != want_digest) throw UsageError("checkpoint: parameter digest mismatch in " + dir.string());
  return out;
}

}  // namespace tta
