#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tta {

/// Dense row-major tensor. Image batches are NHWC, single images HWC,
/// matrices (rows, cols). Shape is dynamic; data is a flat vector.
template <typename Real>
struct Tensor {
  std::vector<int> shape;
  std::vector<Real> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)), v(numel(shape), Real(0)) {}
  Tensor(std::vector<int> s, Real fill) : shape(std::move(s)), v(numel(shape), fill) {}

  static std::int64_t numel(const std::vector<int>& s) {
    std::int64_t n = 1;
    for (int d : s) {
      if (d < 0) throw std::invalid_argument("tensor: negative dimension");
      n *= d;
    }
    return n;
  }

  std::int64_t size() const { return static_cast<std::int64_t>(v.size()); }
  int ndim() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape.at(static_cast<size_t>(i)); }
  bool empty() const { return v.empty(); }

  Real* data() { return v.data(); }
  const Real* data() const { return v.data(); }

  Real& operator[](std::int64_t i) { return v[static_cast<size_t>(i)]; }
  Real operator[](std::int64_t i) const { return v[static_cast<size_t>(i)]; }

  void fill(Real x) { std::fill(v.begin(), v.end(), x); }

  /// Reinterpret the flat buffer under a new shape with the same element count.
  Tensor reshaped(std::vector<int> s) const {
    if (numel(s) != size()) throw std::invalid_argument("tensor: reshape element count mismatch");
    Tensor out;
    out.shape = std::move(s);
    out.v = v;
    return out;
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  std::string shape_str() const {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ")";
    return os.str();
  }

  template <typename Other>
  Tensor<Other> cast() const {
    Tensor<Other> out;
    out.shape = shape;
    out.v.resize(v.size());
    for (size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<Other>(v[i]);
    return out;
  }
};

template <typename Real>
bool all_finite(const Tensor<Real>& t) {
  for (Real x : t.v)
    if (!std::isfinite(static_cast<double>(x))) return false;
  return true;
}

/// Stack equally-shaped tensors along a new leading axis.
template <typename Real>
Tensor<Real> stack(const std::vector<const Tensor<Real>*>& items) {
  if (items.empty()) throw std::invalid_argument("stack: empty batch");
  std::vector<int> s = items[0]->shape;
  for (const auto* t : items)
    if (t->shape != s) throw std::invalid_argument("stack: shape mismatch");
  std::vector<int> out_shape;
  out_shape.push_back(static_cast<int>(items.size()));
  out_shape.insert(out_shape.end(), s.begin(), s.end());
  Tensor<Real> out(out_shape);
  const std::int64_t per = items[0]->size();
  for (size_t i = 0; i < items.size(); ++i)
    std::copy(items[i]->v.begin(), items[i]->v.end(), out.v.begin() + static_cast<std::int64_t>(i) * per);
  return out;
}

}  // namespace tta
