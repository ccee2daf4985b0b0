#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tta/core/digest.hpp"
#include "tta/core/rng.hpp"
#include "tta/io/json_strict.hpp"

namespace tta {

// ---------------------------------------------------------------------------
// Texture model: each class mixes the same band-limited value-noise octaves
// with class-specific amplitudes, plus a fine-detail octave shared by all
// classes. Class identity is carried by the octave energy profile and
// magnification is inferable from how that profile shifts under resampling.
// ---------------------------------------------------------------------------

struct TextureParams {
  std::vector<int> octave_spacing = {48, 12, 3};
  std::vector<std::vector<double>> class_amps = {
      {0.22, 0.05, 0.02}, {0.05, 0.22, 0.05}, {0.02, 0.05, 0.22}};  // [class][octave]
  int fine_spacing = 2;
  double fine_amp = 0.16;
  int chroma_spacing = 16;
  double chroma_amp = 0.05;
  double base_gray = 0.5;

  void validate() const {
    if (octave_spacing.empty()) throw UsageError("texture: need at least one octave");
    for (int s : octave_spacing)
      if (s < 1) throw UsageError("texture: octave spacing must be >= 1");
    if (class_amps.size() != 3) throw UsageError("texture: need amplitudes for 3 classes");
    for (const auto& a : class_amps)
      if (a.size() != octave_spacing.size())
        throw UsageError("texture: class amplitude count must match octave count");
    if (fine_spacing < 1 || chroma_spacing < 1) throw UsageError("texture: spacings must be >= 1");
  }

  Json to_json() const {
    return Json{{"octave_spacing", octave_spacing}, {"class_amps", class_amps},
                {"fine_spacing", fine_spacing},     {"fine_amp", fine_amp},
                {"chroma_spacing", chroma_spacing}, {"chroma_amp", chroma_amp},
                {"base_gray", base_gray}};
  }
  static TextureParams from_json(const Json& j, const std::string& path) {
    StrictObject o(j, path);
    TextureParams t;
    t.octave_spacing = o.get_or<std::vector<int>>("octave_spacing", t.octave_spacing);
    t.class_amps = o.get_or<std::vector<std::vector<double>>>("class_amps", t.class_amps);
    t.fine_spacing = o.get_or<int>("fine_spacing", t.fine_spacing);
    t.fine_amp = o.get_or<double>("fine_amp", t.fine_amp);
    t.chroma_spacing = o.get_or<int>("chroma_spacing", t.chroma_spacing);
    t.chroma_amp = o.get_or<double>("chroma_amp", t.chroma_amp);
    t.base_gray = o.get_or<double>("base_gray", t.base_gray);
    o.done();
    t.validate();
    return t;
  }
};

/// Synthetic stand-in for one scanned slide: an RGB base image at 0.25
/// microns per pixel plus a coarse class map (0 normal, 1 stroma, 2 cancer).
struct VirtualSlide {
  int id = 0;
  int size = 0;                  // base image is size x size at 0.25 mpp
  int cell_px = 0;               // class-map cell edge in base pixels
  int cells = 0;                 // cells per side
  std::vector<std::uint8_t> base_rgb;   // HWC
  std::vector<std::uint8_t> class_map;  // cells x cells
  std::uint64_t gen_seed = 0;

  int class_at(int y, int x) const {
    int cy = std::min(y / cell_px, cells - 1);
    int cx = std::min(x / cell_px, cells - 1);
    return class_map[static_cast<size_t>(cy) * cells + cx];
  }
};

struct DataConfig {
  int n_slides = 12;
  int slide_size = 768;
  int cell_px = 192;
  int patch_size = 64;
  int patches_per_slide = 64;
  TextureParams texture;

  void validate() const {
    if (n_slides < 4) throw UsageError("data: need at least 4 slides (one per split)");
    if (patch_size < 1) throw UsageError("data: patch_size must be positive");
    if (slide_size < 4 * patch_size)
      throw UsageError("data: slide_size must fit the 1.0 mpp patch footprint (>= 4*patch_size)");
    if (cell_px < patch_size) throw UsageError("data: cell_px must be >= patch_size");
    if (patches_per_slide < 1) throw UsageError("data: patches_per_slide must be positive");
    texture.validate();
  }

  Json to_json() const {
    return Json{{"n_slides", n_slides},   {"slide_size", slide_size},
                {"cell_px", cell_px},     {"patch_size", patch_size},
                {"patches_per_slide", patches_per_slide}, {"texture", texture.to_json()}};
  }
  static DataConfig from_json(const Json& j, const std::string& path) {
    StrictObject o(j, path);
    DataConfig c;
    c.n_slides = o.get_or<int>("n_slides", c.n_slides);
    c.slide_size = o.get_or<int>("slide_size", c.slide_size);
    c.cell_px = o.get_or<int>("cell_px", c.cell_px);
    c.patch_size = o.get_or<int>("patch_size", c.patch_size);
    c.patches_per_slide = o.get_or<int>("patches_per_slide", c.patches_per_slide);
    if (o.has_child("texture")) c.texture = TextureParams::from_json(o.raw("texture"), path + ".texture");
    o.done();
    c.validate();
    return c;
  }
};

// Band-limited value noise: a lattice of uniform values bilinearly
// interpolated to pixel resolution.
class NoiseField {
 public:
  NoiseField(int size, int spacing, std::uint64_t seed) : spacing_(spacing) {
    lattice_w_ = size / spacing + 2;
    values_.resize(static_cast<size_t>(lattice_w_) * lattice_w_);
    Rng rng(seed);
    for (auto& v : values_) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  }

  float at(int y, int x) const {
    const float fy = static_cast<float>(y) / spacing_;
    const float fx = static_cast<float>(x) / spacing_;
    const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
    const float wy = fy - y0, wx = fx - x0;
    const auto v = [&](int yy, int xx) { return values_[static_cast<size_t>(yy) * lattice_w_ + xx]; };
    return (1 - wy) * ((1 - wx) * v(y0, x0) + wx * v(y0, x0 + 1)) +
           wy * ((1 - wx) * v(y0 + 1, x0) + wx * v(y0 + 1, x0 + 1));
  }

 private:
  int spacing_;
  int lattice_w_;
  std::vector<float> values_;
};

inline VirtualSlide generate_slide(const DataConfig& cfg, int slide_id, std::uint64_t seed) {
  const auto& tx = cfg.texture;
  VirtualSlide s;
  s.id = slide_id;
  s.size = cfg.slide_size;
  s.cell_px = cfg.cell_px;
  s.cells = (cfg.slide_size + cfg.cell_px - 1) / cfg.cell_px;
  s.gen_seed = seed;

  Rng cmap_rng(derive_seed(seed, "classmap", slide_id));
  s.class_map.resize(static_cast<size_t>(s.cells) * s.cells);
  for (auto& c : s.class_map) c = static_cast<std::uint8_t>(cmap_rng.uniform_int(3));

  std::vector<NoiseField> octaves;
  for (size_t o = 0; o < tx.octave_spacing.size(); ++o)
    octaves.emplace_back(s.size, tx.octave_spacing[o], derive_seed(seed, "octave", slide_id, o));
  NoiseField fine(s.size, tx.fine_spacing, derive_seed(seed, "fine", slide_id));
  std::array<NoiseField, 3> chroma = {
      NoiseField(s.size, tx.chroma_spacing, derive_seed(seed, "chroma", slide_id, 0)),
      NoiseField(s.size, tx.chroma_spacing, derive_seed(seed, "chroma", slide_id, 1)),
      NoiseField(s.size, tx.chroma_spacing, derive_seed(seed, "chroma", slide_id, 2))};

  s.base_rgb.resize(static_cast<size_t>(s.size) * s.size * 3);
  for (int y = 0; y < s.size; ++y)
    for (int x = 0; x < s.size; ++x) {
      const int cls = s.class_at(y, x);
      double lum = tx.fine_amp * fine.at(y, x);
      for (size_t o = 0; o < octaves.size(); ++o)
        lum += tx.class_amps[static_cast<size_t>(cls)][o] * octaves[o].at(y, x);
      const size_t i = (static_cast<size_t>(y) * s.size + x) * 3;
      for (int ch = 0; ch < 3; ++ch) {
        double v = tx.base_gray + lum + tx.chroma_amp * chroma[static_cast<size_t>(ch)].at(y, x);
        v = std::min(1.0, std::max(0.0, v));
        s.base_rgb[i + static_cast<size_t>(ch)] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  return s;
}

inline std::vector<VirtualSlide> generate_synthetic_dataset(const DataConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<VirtualSlide> slides;
  slides.reserve(static_cast<size_t>(cfg.n_slides));
  for (int i = 0; i < cfg.n_slides; ++i) slides.push_back(generate_slide(cfg, i, seed));
  return slides;
}

inline std::uint64_t corpus_digest(const std::vector<VirtualSlide>& slides) {
  Digest d;
  d.update_pod<std::uint64_t>(slides.size());
  for (const auto& s : slides) {
    d.update_pod(s.id);
    d.update_pod(s.size);
    d.update_pod(s.cell_px);
    d.update_vec(s.base_rgb);
    d.update_vec(s.class_map);
  }
  return d.value();
}

}  // namespace tta
