#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "tta/core/rng.hpp"
#include "tta/data/dataset.hpp"

namespace tta {

/// Deterministic description of a simulated test-domain transformation.
/// Every kind is label-preserving; that is the covariate-shift contract.
struct ShiftSpec {
  enum class Kind { identity, gaussian, scanner };
  Kind kind = Kind::identity;
  double sigma = 0.0;                                  // gaussian, on the [0,1] scale
  std::array<double, 9> color_matrix = {1, 0, 0, 0, 1, 0, 0, 0, 1};  // scanner
  std::array<double, 3> offset = {0, 0, 0};
  double gamma = 1.0;
  std::string id = "none";

  void validate() const {
    if (sigma < 0) throw UsageError("shift: sigma must be >= 0");
    if (gamma <= 0) throw UsageError("shift: gamma must be positive");
  }

  static ShiftSpec identity() { return {}; }

  static ShiftSpec gaussian_noise(double sigma, std::string id = "gaussian") {
    ShiftSpec s;
    s.kind = Kind::gaussian;
    s.sigma = sigma;
    s.id = std::move(id);
    s.validate();
    return s;
  }

  /// Scanner-style global color-response change derived from a domain seed:
  /// an affine color matrix plus per-channel offset and a gamma curve.
  static ShiftSpec scanner_from_seed(std::uint64_t domain_seed, std::string id = "scanner") {
    Rng rng(derive_seed(domain_seed, "scanner"));
    ShiftSpec s;
    s.kind = Kind::scanner;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        s.color_matrix[static_cast<size_t>(r * 3 + c)] =
            (r == c) ? rng.uniform(0.85, 1.15) : rng.uniform(-0.08, 0.08);
    for (auto& o : s.offset) o = rng.uniform(-0.06, 0.06);
    s.gamma = rng.uniform(0.8, 1.25);
    s.id = std::move(id);
    return s;
  }

  static const char* kind_name(Kind k) {
    switch (k) {
      case Kind::identity: return "identity";
      case Kind::gaussian: return "gaussian";
      case Kind::scanner: return "scanner";
    }
    return "?";
  }

  Json to_json() const {
    Json j;
    j["kind"] = kind_name(kind);
    j["id"] = id;
    if (kind == Kind::gaussian) j["sigma"] = sigma;
    if (kind == Kind::scanner) {
      j["color_matrix"] = std::vector<double>(color_matrix.begin(), color_matrix.end());
      j["offset"] = std::vector<double>(offset.begin(), offset.end());
      j["gamma"] = gamma;
    }
    return j;
  }

  static ShiftSpec from_json(const Json& j, const std::string& path) {
    StrictObject o(j, path);
    ShiftSpec s;
    const std::string kind = o.get<std::string>("kind");
    s.id = o.get_or<std::string>("id", kind);
    if (kind == "identity") {
      s.kind = Kind::identity;
    } else if (kind == "gaussian") {
      s.kind = Kind::gaussian;
      s.sigma = o.get<double>("sigma");
    } else if (kind == "scanner") {
      s.kind = Kind::scanner;
      if (o.has("seed")) {
        s = scanner_from_seed(o.get<std::uint64_t>("seed"), s.id);
      } else {
        auto m = o.get<std::vector<double>>("color_matrix");
        auto off = o.get<std::vector<double>>("offset");
        if (m.size() != 9 || off.size() != 3) throw UsageError("shift: bad scanner parameters at " + path);
        std::copy(m.begin(), m.end(), s.color_matrix.begin());
        std::copy(off.begin(), off.end(), s.offset.begin());
        s.gamma = o.get<double>("gamma");
      }
    } else {
      throw UsageError("shift: unknown kind " + kind + " at " + path);
    }
    o.done();
    s.validate();
    return s;
  }
};

/// Apply one shift to one image. Identity is bitwise; sigma=0 and the
/// identity scanner parameters are bitwise too.
inline Image apply_shift(const Image& img, const ShiftSpec& spec, Rng& rng) {
  spec.validate();
  switch (spec.kind) {
    case ShiftSpec::Kind::identity:
      return img;
    case ShiftSpec::Kind::gaussian: {
      if (spec.sigma == 0.0) return img;
      Image out = img;
      for (auto& v : out.v) v = clamp01(v + static_cast<float>(rng.normal(0.0, spec.sigma)));
      return out;
    }
    case ShiftSpec::Kind::scanner: {
      const auto& m = spec.color_matrix;
      const bool identity_matrix = m == std::array<double, 9>{1, 0, 0, 0, 1, 0, 0, 0, 1} &&
                                   spec.offset == std::array<double, 3>{0, 0, 0};
      if (identity_matrix && spec.gamma == 1.0) return img;
      Image out(img.shape);
      const std::int64_t npx = static_cast<std::int64_t>(img.dim(0)) * img.dim(1);
      for (std::int64_t i = 0; i < npx; ++i) {
        const std::int64_t k = i * 3;
        const double r = img[k], g = img[k + 1], b = img[k + 2];
        for (int ch = 0; ch < 3; ++ch) {
          double v = m[static_cast<size_t>(ch * 3)] * r + m[static_cast<size_t>(ch * 3 + 1)] * g +
                     m[static_cast<size_t>(ch * 3 + 2)] * b + spec.offset[static_cast<size_t>(ch)];
          v = std::max(0.0, v);
          if (spec.gamma != 1.0) v = std::pow(v, spec.gamma);
          out[k + ch] = clamp01(static_cast<float>(v));
        }
      }
      return out;
    }
  }
  return img;
}

/// Shift every pyramid level of every record. The per-record rng is derived
/// from (seed, record key), so the result is independent of container order,
/// and labels are untouched.
inline std::vector<PatchRecord> shift_dataset(std::vector<PatchRecord> records, const ShiftSpec& spec,
                                              std::uint64_t seed) {
  for (auto& r : records) {
    for (int level = 0; level < 3; ++level) {
      Rng rng(derive_seed(seed, "shift", std::hash<std::string>{}(r.key()), level));
      r.pyramid.patches[static_cast<size_t>(level)] =
          apply_shift(r.pyramid.patches[static_cast<size_t>(level)], spec, rng);
    }
  }
  return records;
}

}  // namespace tta
