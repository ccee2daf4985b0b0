#pragma once

#include <array>
#include <string>
#include <vector>

#include "tta/data/pyramid.hpp"

namespace tta {

/// One labeled pyramid sample. The key identifies a record independently of
/// container order; everything keyed on it (shift noise, adaptation episodes)
/// is therefore order-invariant.
struct PatchRecord {
  int slide_id = 0;
  int cy = 0, cx = 0;  // base-pixel center
  int label = 0;       // 0 normal, 1 stroma, 2 cancer
  PatchPyramid pyramid;

  std::string key() const {
    return std::to_string(slide_id) + ":" + std::to_string(cy) + ":" + std::to_string(cx);
  }
};

/// Class-targeted patch sampling: cycles the three classes and picks a random
/// cell of the wanted class, keeping the 0.25 mpp patch inside one texture
/// cell and the full 1.0 mpp footprint inside the slide.
inline std::vector<PatchRecord> sample_patches(const VirtualSlide& slide, int count, int patch_size,
                                               std::uint64_t seed) {
  Rng rng(derive_seed(seed, "patches", slide.id));
  const int margin = 2 * patch_size;  // half of the 1.0 mpp footprint
  if (slide.size < 4 * patch_size) throw std::invalid_argument("sample_patches: slide too small");

  // candidate cells per class whose interior can host a centered patch
  std::array<std::vector<std::pair<int, int>>, 3> cells_by_class;
  for (int cy = 0; cy < slide.cells; ++cy)
    for (int cx = 0; cx < slide.cells; ++cx) {
      const int y_lo = std::max(cy * slide.cell_px + patch_size / 2, margin);
      const int y_hi = std::min((cy + 1) * slide.cell_px - patch_size / 2, slide.size - margin);
      const int x_lo = std::max(cx * slide.cell_px + patch_size / 2, margin);
      const int x_hi = std::min((cx + 1) * slide.cell_px - patch_size / 2, slide.size - margin);
      if (y_lo <= y_hi && x_lo <= x_hi)
        cells_by_class[slide.class_map[static_cast<size_t>(cy) * slide.cells + cx]].push_back({cy, cx});
    }

  std::vector<PatchRecord> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    int cls = i % 3;
    if (cells_by_class[static_cast<size_t>(cls)].empty()) {
      for (int c = 0; c < 3; ++c)
        if (!cells_by_class[static_cast<size_t>(c)].empty()) { cls = c; break; }
      if (cells_by_class[static_cast<size_t>(cls)].empty())
        throw std::invalid_argument("sample_patches: no usable cells on slide");
    }
    const auto& pool = cells_by_class[static_cast<size_t>(cls)];
    const auto [cy_cell, cx_cell] = pool[static_cast<size_t>(rng.uniform_int(static_cast<int>(pool.size())))];
    const int y_lo = std::max(cy_cell * slide.cell_px + patch_size / 2, margin);
    const int y_hi = std::min((cy_cell + 1) * slide.cell_px - patch_size / 2, slide.size - margin);
    const int x_lo = std::max(cx_cell * slide.cell_px + patch_size / 2, margin);
    const int x_hi = std::min((cx_cell + 1) * slide.cell_px - patch_size / 2, slide.size - margin);
    PatchRecord r;
    r.slide_id = slide.id;
    r.cy = y_lo + rng.uniform_int(y_hi - y_lo + 1);
    r.cx = x_lo + rng.uniform_int(x_hi - x_lo + 1);
    r.label = slide.class_at(r.cy, r.cx);
    r.pyramid = sample_concentric(slide, r.cy, r.cx, patch_size);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Slide-level splits
// ---------------------------------------------------------------------------

struct SplitSpec {
  // Defaults reproduce the 232/47/47/47 ratios.
  std::array<double, 4> fractions = {232.0 / 373.0, 47.0 / 373.0, 47.0 / 373.0, 47.0 / 373.0};
  std::uint64_t seed = 0;

  void validate() const {
    double s = 0;
    for (double f : fractions) {
      if (f < 0) throw UsageError("split: fractions must be non-negative");
      s += f;
    }
    if (std::abs(s - 1.0) > 1e-9) throw UsageError("split: fractions must sum to 1");
  }

  Json to_json() const {
    return Json{{"fractions", std::vector<double>(fractions.begin(), fractions.end())},
                {"seed", seed}};
  }
  static SplitSpec from_json(const Json& j, const std::string& path) {
    StrictObject o(j, path);
    SplitSpec s;
    if (o.has("fractions")) {
      auto f = o.get<std::vector<double>>("fractions");
      if (f.size() != 4) throw UsageError("split: need 4 fractions");
      std::copy(f.begin(), f.end(), s.fractions.begin());
    }
    s.seed = o.get_or<std::uint64_t>("seed", s.seed);
    o.done();
    s.validate();
    return s;
  }
};

struct SlideSplits {
  std::array<std::vector<int>, 4> sets;  // train, val, testA, testB (slide ids)
  const std::vector<int>& train() const { return sets[0]; }
  const std::vector<int>& val() const { return sets[1]; }
  const std::vector<int>& test_a() const { return sets[2]; }
  const std::vector<int>& test_b() const { return sets[3]; }
};

inline const std::array<const char*, 4>& split_names() {
  static const std::array<const char*, 4> names = {"train", "val", "testA", "testB"};
  return names;
}

inline SlideSplits split_slides(int n_slides, const SplitSpec& spec);

/// Deterministic slide-level partition via largest-remainder apportionment.
/// Splitting always operates on whole slides, never on patches.
inline SlideSplits split_slides(const std::vector<VirtualSlide>& slides, const SplitSpec& spec) {
  return split_slides(static_cast<int>(slides.size()), spec);
}

inline SlideSplits split_slides(int n_slides, const SplitSpec& spec) {
  spec.validate();
  if (n_slides < 4) throw UsageError("split: need at least 4 slides");
  std::array<int, 4> counts{};
  std::array<double, 4> rem{};
  int assigned = 0;
  for (int i = 0; i < 4; ++i) {
    const double want = spec.fractions[static_cast<size_t>(i)] * n_slides;
    counts[static_cast<size_t>(i)] = static_cast<int>(want);
    rem[static_cast<size_t>(i)] = want - counts[static_cast<size_t>(i)];
    assigned += counts[static_cast<size_t>(i)];
  }
  for (int left = n_slides - assigned; left > 0; --left) {
    int best = 0;
    for (int i = 1; i < 4; ++i)
      if (rem[static_cast<size_t>(i)] > rem[static_cast<size_t>(best)]) best = i;
    counts[static_cast<size_t>(best)]++;
    rem[static_cast<size_t>(best)] = -1;
  }
  for (int i = 0; i < 4; ++i)
    if (counts[static_cast<size_t>(i)] == 0)
      throw UsageError(std::string("split: empty ") + split_names()[static_cast<size_t>(i)] +
                       " split under the given fractions");

  std::vector<int> ids(static_cast<size_t>(n_slides));
  for (int i = 0; i < n_slides; ++i) ids[static_cast<size_t>(i)] = i;
  Rng rng(derive_seed(spec.seed, "split"));
  rng.shuffle(ids);

  SlideSplits out;
  size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    out.sets[static_cast<size_t>(i)].assign(ids.begin() + static_cast<long>(pos),
                                            ids.begin() + static_cast<long>(pos + counts[static_cast<size_t>(i)]));
    pos += static_cast<size_t>(counts[static_cast<size_t>(i)]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Class-stratified batching
// ---------------------------------------------------------------------------

/// Emits batches with exactly batch_size/3 records of each class, sampling
/// without replacement within a per-class epoch and reshuffling between
/// epochs.
class StratifiedBatcher {
 public:
  StratifiedBatcher(const std::vector<PatchRecord>& records, int batch_size, std::uint64_t seed)
      : batch_size_(batch_size), seed_(seed) {
    if (batch_size <= 0 || batch_size % 3 != 0)
      throw std::invalid_argument("stratified_batches: batch size must be a positive multiple of 3");
    for (const auto& r : records) pools_[static_cast<size_t>(r.label)].push_back(&r);
    for (int c = 0; c < 3; ++c) {
      if (pools_[static_cast<size_t>(c)].empty())
        throw std::invalid_argument("stratified_batches: class " + std::to_string(c) + " has no records");
      reshuffle(c);
    }
  }

  std::vector<const PatchRecord*> next() {
    std::vector<const PatchRecord*> batch;
    batch.reserve(static_cast<size_t>(batch_size_));
    const int per_class = batch_size_ / 3;
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < per_class; ++k) {
        if (pos_[static_cast<size_t>(c)] >= pools_[static_cast<size_t>(c)].size()) reshuffle(c);
        batch.push_back(pools_[static_cast<size_t>(c)][pos_[static_cast<size_t>(c)]++]);
      }
    return batch;
  }

 private:
  void reshuffle(int c) {
    Rng rng(derive_seed(seed_, "epoch", c, epoch_[static_cast<size_t>(c)]++));
    rng.shuffle(pools_[static_cast<size_t>(c)]);
    pos_[static_cast<size_t>(c)] = 0;
  }

  std::array<std::vector<const PatchRecord*>, 3> pools_;
  std::array<size_t, 3> pos_{};
  std::array<long, 3> epoch_{};
  int batch_size_;
  std::uint64_t seed_;
};

}  // namespace tta
