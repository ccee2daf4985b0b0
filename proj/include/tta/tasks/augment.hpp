#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tta/core/rng.hpp"
#include "tta/core/tensor.hpp"
#include "tta/io/json_strict.hpp"

namespace tta {

using Image = Tensor<float>;  // HWC float in [0, 1]

// ---------------------------------------------------------------------------
// Augmentation op log: every pipeline draw is recorded so tests can assert
// the primary-before-secondary ordering and reproduce a batch exactly.
// ---------------------------------------------------------------------------

struct AugLogEntry {
  int example = 0;
  std::string stage;  // "primary" | "secondary"
  std::string op;
  double a = 0, b = 0, c = 0;
};

struct AugLog {
  std::vector<AugLogEntry> entries;
  int example = 0;
  std::string stage = "primary";
  void record(const std::string& op, double a = 0, double b = 0, double c = 0) {
    entries.push_back({example, stage, op, a, b, c});
  }
};

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

struct PrimaryAugConfig {
  double jitter = 0.2;     // color jitter strength
  double hflip_prob = 0.5;
  double vflip_prob = 0.5;

  void validate() const {
    if (jitter < 0) throw UsageError("augment: primary jitter must be >= 0");
    for (double p : {hflip_prob, vflip_prob})
      if (p < 0 || p > 1) throw UsageError("augment: flip probabilities must be in [0,1]");
  }

  Json to_json() const {
    return Json{{"jitter", jitter}, {"hflip_prob", hflip_prob}, {"vflip_prob", vflip_prob}};
  }
  static PrimaryAugConfig from_json(const Json& j, const std::string& path) {
    StrictObject o(j, path);
    PrimaryAugConfig c;
    c.jitter = o.get_or<double>("jitter", c.jitter);
    c.hflip_prob = o.get_or<double>("hflip_prob", c.hflip_prob);
    c.vflip_prob = o.get_or<double>("vflip_prob", c.vflip_prob);
    o.done();
    c.validate();
    return c;
  }
};

struct SimclrAugConfig {
  double rotation_prob = 1.0;            // rotate by a uniform multiple of 90 degrees
  std::string rotation_mode = "right_angle";  // or "arbitrary" (any angle, bilinear)
  double flip_prob = 0.5;
  double jitter = 0.6;                   // strong color jitter
  double crop_scale_min = 0.5;           // random-resize-crop area fraction
  double crop_scale_max = 1.0;
  double grayscale_prob = 0.2;

  void validate() const {
    for (double p : {rotation_prob, flip_prob, grayscale_prob})
      if (p < 0 || p > 1) throw UsageError("augment: probabilities must be in [0,1]");
    if (jitter < 0) throw UsageError("augment: simclr jitter must be >= 0");
    if (!(crop_scale_min > 0) || crop_scale_max > 1 || crop_scale_min > crop_scale_max)
      throw UsageError("augment: crop scale range must satisfy 0 < min <= max <= 1");
    if (rotation_mode != "right_angle" && rotation_mode != "arbitrary")
      throw UsageError("augment: rotation_mode must be right_angle or arbitrary");
  }

  Json to_json() const {
    return Json{{"rotation_prob", rotation_prob}, {"rotation_mode", rotation_mode},
                {"flip_prob", flip_prob},         {"jitter", jitter},
                {"crop_scale_min", crop_scale_min}, {"crop_scale_max", crop_scale_max},
                {"grayscale_prob", grayscale_prob}};
  }
  static SimclrAugConfig from_json(const Json& j, const std::string& path) {
    StrictObject o(j, path);
    SimclrAugConfig c;
    c.rotation_prob = o.get_or<double>("rotation_prob", c.rotation_prob);
    c.rotation_mode = o.get_or<std::string>("rotation_mode", c.rotation_mode);
    c.flip_prob = o.get_or<double>("flip_prob", c.flip_prob);
    c.jitter = o.get_or<double>("jitter", c.jitter);
    c.crop_scale_min = o.get_or<double>("crop_scale_min", c.crop_scale_min);
    c.crop_scale_max = o.get_or<double>("crop_scale_max", c.crop_scale_max);
    c.grayscale_prob = o.get_or<double>("grayscale_prob", c.grayscale_prob);
    o.done();
    c.validate();
    return c;
  }
};

struct AugmentationConfig {
  PrimaryAugConfig primary;
  SimclrAugConfig simclr;

  Json to_json() const { return Json{{"primary", primary.to_json()}, {"simclr", simclr.to_json()}}; }
  static AugmentationConfig from_json(const Json& j, const std::string& path) {
    StrictObject o(j, path);
    AugmentationConfig c;
    if (o.has_child("primary")) c.primary = PrimaryAugConfig::from_json(o.raw("primary"), path + ".primary");
    if (o.has_child("simclr")) c.simclr = SimclrAugConfig::from_json(o.raw("simclr"), path + ".simclr");
    o.done();
    return c;
  }
};

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

inline float clamp01(float x) { return x < 0.f ? 0.f : (x > 1.f ? 1.f : x); }

inline Image flip_horizontal(const Image& img) {
  const int h = img.dim(0), w = img.dim(1), c = img.dim(2);
  Image out(img.shape);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch)
        out[(static_cast<std::int64_t>(y) * w + x) * c + ch] =
            img[(static_cast<std::int64_t>(y) * w + (w - 1 - x)) * c + ch];
  return out;
}

inline Image flip_vertical(const Image& img) {
  const int h = img.dim(0), w = img.dim(1), c = img.dim(2);
  Image out(img.shape);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch)
        out[(static_cast<std::int64_t>(y) * w + x) * c + ch] =
            img[(static_cast<std::int64_t>(h - 1 - y) * w + x) * c + ch];
  return out;
}

/// Rotate by k*90 degrees counterclockwise (square images).
inline Image rotate90(const Image& img, int k) {
  const int h = img.dim(0), w = img.dim(1), c = img.dim(2);
  k = ((k % 4) + 4) % 4;
  if (k == 0) return img;
  Image out({k % 2 == 0 ? h : w, k % 2 == 0 ? w : h, c});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int ny = 0, nx = 0;
      if (k == 1) { ny = w - 1 - x; nx = y; }
      else if (k == 2) { ny = h - 1 - y; nx = w - 1 - x; }
      else { ny = x; nx = h - 1 - y; }
      const std::int64_t src = (static_cast<std::int64_t>(y) * w + x) * c;
      const std::int64_t dst = (static_cast<std::int64_t>(ny) * out.dim(1) + nx) * c;
      for (int ch = 0; ch < c; ++ch) out[dst + ch] = img[src + ch];
    }
  return out;
}

/// Rotate by an arbitrary angle (radians) with inverse-mapped bilinear
/// sampling, edge-clamped.
inline Image rotate_arbitrary(const Image& img, double angle) {
  const int h = img.dim(0), w = img.dim(1), c = img.dim(2);
  Image out(img.shape);
  const double cy = (h - 1) / 2.0, cx = (w - 1) / 2.0;
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dy = y - cy, dx = x - cx;
      const double sy = ca * dy + sa * dx + cy;
      const double sx = -sa * dy + ca * dx + cx;
      const double fy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
      const double fx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
      const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
      const int y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
      const double wy = fy - y0, wx = fx - x0;
      for (int ch = 0; ch < c; ++ch) {
        const auto px = [&](int yy, int xx) {
          return static_cast<double>(img[(static_cast<std::int64_t>(yy) * w + xx) * c + ch]);
        };
        const double v = (1 - wy) * ((1 - wx) * px(y0, x0) + wx * px(y0, x1)) +
                         wy * ((1 - wx) * px(y1, x0) + wx * px(y1, x1));
        out[(static_cast<std::int64_t>(y) * w + x) * c + ch] = static_cast<float>(v);
      }
    }
  return out;
}

/// Bilinear resize with pixel-center mapping. Same-size resize is an exact copy.
inline Image resize_bilinear(const Image& img, int oh, int ow) {
  const int h = img.dim(0), w = img.dim(1), c = img.dim(2);
  if (oh == h && ow == w) return img;
  Image out({oh, ow, c});
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      const double fy = std::clamp((y + 0.5) * h / oh - 0.5, 0.0, static_cast<double>(h - 1));
      const double fx = std::clamp((x + 0.5) * w / ow - 0.5, 0.0, static_cast<double>(w - 1));
      const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
      const int y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
      const double wy = fy - y0, wx = fx - x0;
      for (int ch = 0; ch < c; ++ch) {
        const auto px = [&](int yy, int xx) {
          return static_cast<double>(img[(static_cast<std::int64_t>(yy) * w + xx) * c + ch]);
        };
        const double v = (1 - wy) * ((1 - wx) * px(y0, x0) + wx * px(y0, x1)) +
                         wy * ((1 - wx) * px(y1, x0) + wx * px(y1, x1));
        out[(static_cast<std::int64_t>(y) * ow + x) * c + ch] = static_cast<float>(v);
      }
    }
  return out;
}

inline Image crop(const Image& img, int top, int left, int ch_, int cw) {
  const int w = img.dim(1), c = img.dim(2);
  Image out({ch_, cw, c});
  for (int y = 0; y < ch_; ++y)
    for (int x = 0; x < cw; ++x)
      for (int k = 0; k < c; ++k)
        out[(static_cast<std::int64_t>(y) * cw + x) * c + k] =
            img[(static_cast<std::int64_t>(y + top) * w + (x + left)) * c + k];
  return out;
}

inline Image to_grayscale(const Image& img) {
  const int h = img.dim(0), w = img.dim(1), c = img.dim(2);
  Image out(img.shape);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::int64_t i = (static_cast<std::int64_t>(y) * w + x) * c;
      const float g = 0.299f * img[i] + 0.587f * img[i + 1] + 0.114f * img[i + 2];
      for (int ch = 0; ch < c; ++ch) out[i + ch] = g;
    }
  return out;
}

/// Brightness, contrast, saturation, each scaled by a factor drawn from
/// [max(0, 1-strength), 1+strength]. Factors equal to one are skipped so a
/// zero-strength config is the exact identity.
inline Image color_jitter(const Image& img, double strength, Rng& rng, AugLog* log = nullptr) {
  const double lo = std::max(0.0, 1.0 - strength), hi = 1.0 + strength;
  const double fb = rng.uniform(lo, hi);
  const double fc = rng.uniform(lo, hi);
  const double fs = rng.uniform(lo, hi);
  if (log) log->record("color_jitter", fb, fc, fs);
  Image out = img;
  const int h = out.dim(0), w = out.dim(1), c = out.dim(2);
  const std::int64_t npx = static_cast<std::int64_t>(h) * w;
  if (fb != 1.0)
    for (auto& v : out.v) v = clamp01(v * static_cast<float>(fb));
  if (fc != 1.0) {
    double mean = 0.0;
    for (std::int64_t i = 0; i < npx; ++i) {
      const std::int64_t k = i * c;
      mean += 0.299 * out[k] + 0.587 * out[k + 1] + 0.114 * out[k + 2];
    }
    mean /= static_cast<double>(npx);
    for (auto& v : out.v)
      v = clamp01(static_cast<float>((v - mean) * fc + mean));
  }
  if (fs != 1.0) {
    for (std::int64_t i = 0; i < npx; ++i) {
      const std::int64_t k = i * c;
      const float g = 0.299f * out[k] + 0.587f * out[k + 1] + 0.114f * out[k + 2];
      for (int ch = 0; ch < c; ++ch)
        out[k + ch] = clamp01(static_cast<float>(g + (out[k + ch] - g) * fs));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pipelines
// ---------------------------------------------------------------------------

/// Primary-task augmentation: color jitter then flips. Applied first in the
/// joint pipeline; the secondary task sees its output.
inline Image augment_primary(const Image& img, const PrimaryAugConfig& cfg, Rng& rng,
                             AugLog* log = nullptr) {
  Image out = color_jitter(img, cfg.jitter, rng, log);
  if (rng.bernoulli(cfg.hflip_prob)) {
    out = flip_horizontal(out);
    if (log) log->record("hflip");
  }
  if (rng.bernoulli(cfg.vflip_prob)) {
    out = flip_vertical(out);
    if (log) log->record("vflip");
  }
  return out;
}

/// SimCLR view augmentation: rotation, flips, random resize crop, strong
/// color jitter, random grayscale.
inline Image augment_simclr(const Image& img, const SimclrAugConfig& cfg, Rng& rng,
                            AugLog* log = nullptr) {
  Image out = img;
  if (rng.bernoulli(cfg.rotation_prob)) {
    if (cfg.rotation_mode == "right_angle") {
      const int k = rng.uniform_int(4);
      if (k != 0) out = rotate90(out, k);
      if (log) log->record("rotate90", k);
    } else {
      const double angle = rng.uniform(0.0, 6.283185307179586);
      out = rotate_arbitrary(out, angle);
      if (log) log->record("rotate", angle);
    }
  }
  if (rng.bernoulli(cfg.flip_prob)) {
    out = flip_horizontal(out);
    if (log) log->record("hflip");
  }
  if (rng.bernoulli(cfg.flip_prob)) {
    out = flip_vertical(out);
    if (log) log->record("vflip");
  }
  {
    const int s = out.dim(0);
    const double scale = rng.uniform(cfg.crop_scale_min, cfg.crop_scale_max);
    int side = static_cast<int>(std::lround(s * std::sqrt(scale)));
    side = std::clamp(side, 1, s);
    if (side < s) {
      const int top = rng.uniform_int(s - side + 1);
      const int left = rng.uniform_int(s - side + 1);
      out = resize_bilinear(crop(out, top, left, side, side), s, s);
      if (log) log->record("resize_crop", side, top, left);
    } else {
      if (log) log->record("resize_crop", s, 0, 0);
    }
  }
  out = color_jitter(out, cfg.jitter, rng, log);
  if (rng.bernoulli(cfg.grayscale_prob)) {
    out = to_grayscale(out);
    if (log) log->record("grayscale");
  }
  return out;
}

/// Two independently augmented views per image. Each (image, view) pair owns
/// its own rng stream, so results do not depend on batch order.
inline std::pair<std::vector<Image>, std::vector<Image>> make_simclr_views(
    const std::vector<Image>& images, const SimclrAugConfig& cfg, std::uint64_t seed,
    AugLog* log = nullptr) {
  if (images.empty()) throw std::invalid_argument("make_simclr_views: empty batch");
  std::vector<Image> a, b;
  a.reserve(images.size());
  b.reserve(images.size());
  for (size_t i = 0; i < images.size(); ++i) {
    if (log) log->example = static_cast<int>(i);
    Rng ra(derive_seed(seed, "view", i, 0));
    Rng rb(derive_seed(seed, "view", i, 1));
    a.push_back(augment_simclr(images[i], cfg, ra, log));
    b.push_back(augment_simclr(images[i], cfg, rb, log));
  }
  return {std::move(a), std::move(b)};
}

}  // namespace tta
