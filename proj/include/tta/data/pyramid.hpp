#pragma once

#include <array>
#include <stdexcept>

#include "tta/data/synthetic.hpp"
#include "tta/tasks/augment.hpp"

namespace tta {

inline constexpr std::array<double, 3> kMppLevels = {0.25, 0.5, 1.0};

/// Three concentric patches of one slide location at 0.25/0.5/1.0 microns per
/// pixel. All levels share pixel dimensions and physical center; the field of
/// view at level i is size_px * mpp[i] microns per side.
struct PatchPyramid {
  std::array<Image, 3> patches;  // HWC float in [0,1]
  std::array<double, 3> mpp = kMppLevels;
  double center_y_um = 0, center_x_um = 0;
  int size_px = 0;

  double field_of_view_um(int level) const { return size_px * mpp[static_cast<size_t>(level)]; }
};

/// Area-average downsample by an integer factor over non-overlapping blocks
/// (the optical-magnification model: a coarser level integrates light over a
/// larger area). Exact inverse relationship with sample_concentric.
inline Image area_downsample(const Image& img, int factor) {
  if (factor < 1) throw std::invalid_argument("area_downsample: factor must be >= 1");
  if (factor == 1) return img;
  const int h = img.dim(0), w = img.dim(1), c = img.dim(2);
  if (h % factor != 0 || w % factor != 0)
    throw std::invalid_argument("area_downsample: size not divisible by factor");
  Image out({h / factor, w / factor, c});
  const double inv = 1.0 / (factor * factor);
  for (int y = 0; y < h / factor; ++y)
    for (int x = 0; x < w / factor; ++x)
      for (int ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (int dy = 0; dy < factor; ++dy)
          for (int dx = 0; dx < factor; ++dx)
            s += img[(static_cast<std::int64_t>(y * factor + dy) * w + (x * factor + dx)) * c + ch];
        out[(static_cast<std::int64_t>(y) * (w / factor) + x) * c + ch] = static_cast<float>(s * inv);
      }
  return out;
}

/// Raw base-resolution region as float [0,1], no bounds forgiveness.
inline Image slide_region(const VirtualSlide& slide, int top, int left, int h, int w) {
  if (top < 0 || left < 0 || top + h > slide.size || left + w > slide.size)
    throw std::out_of_range("slide_region: region outside slide bounds");
  Image out({h, w, 3});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        out[(static_cast<std::int64_t>(y) * w + x) * 3 + c] =
            static_cast<float>(slide.base_rgb[(static_cast<size_t>(top + y) * slide.size + (left + x)) * 3 +
                                              static_cast<size_t>(c)]) /
            255.0f;
  return out;
}

/// Sample the three concentric patches centered at (cy, cx) base pixels.
/// Level k covers a (size_px << k) square of base pixels and is area-averaged
/// down to size_px. Errors (no padding) if the 1.0 mpp footprint does not fit.
inline PatchPyramid sample_concentric(const VirtualSlide& slide, int cy, int cx, int size_px) {
  if (size_px < 1) throw std::invalid_argument("sample_concentric: size_px must be positive");
  PatchPyramid p;
  p.size_px = size_px;
  p.center_y_um = cy * kMppLevels[0];
  p.center_x_um = cx * kMppLevels[0];
  for (int level = 0; level < 3; ++level) {
    const int factor = 1 << level;
    const int footprint = size_px * factor;
    const int top = cy - footprint / 2;
    const int left = cx - footprint / 2;
    if (top < 0 || left < 0 || top + footprint > slide.size || left + footprint > slide.size)
      throw std::out_of_range("sample_concentric: 1.0 mpp footprint outside slide bounds");
    p.patches[static_cast<size_t>(level)] =
        area_downsample(slide_region(slide, top, left, footprint, footprint), factor);
  }
  return p;
}

}  // namespace tta
