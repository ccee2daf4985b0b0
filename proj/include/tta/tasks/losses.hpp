#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tta/core/tensor.hpp"

namespace tta {

/// Contrastive-loss temperature, the usual 0.5 convention.
inline constexpr float kSimclrTemperature = 0.5f;

template <typename Real>
Tensor<Real> softmax_rows(const Tensor<Real>& logits) {
  const int n = logits.dim(0), c = logits.dim(1);
  Tensor<Real> p(logits.shape);
  for (int i = 0; i < n; ++i) {
    const Real* z = logits.data() + static_cast<std::int64_t>(i) * c;
    Real* q = p.data() + static_cast<std::int64_t>(i) * c;
    Real m = z[0];
    for (int k = 1; k < c; ++k) m = std::max(m, z[k]);
    double s = 0.0;
    for (int k = 0; k < c; ++k) {
      const double e = std::exp(static_cast<double>(z[k] - m));
      q[k] = static_cast<Real>(e);
      s += e;
    }
    for (int k = 0; k < c; ++k) q[k] = static_cast<Real>(static_cast<double>(q[k]) / s);
  }
  return p;
}

/// Mean softmax cross entropy. If dlogits is given it receives the gradient
/// of the mean loss (already divided by the batch size).
template <typename Real>
Real cross_entropy(const Tensor<Real>& logits, const std::vector<int>& labels,
                   Tensor<Real>* dlogits = nullptr) {
  if (logits.ndim() != 2) throw std::invalid_argument("cross_entropy: logits must be (N, C)");
  const int n = logits.dim(0), c = logits.dim(1);
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("cross_entropy: label count does not match batch");
  for (int y : labels)
    if (y < 0 || y >= c)
      throw std::invalid_argument("cross_entropy: label " + std::to_string(y) + " outside [0, " +
                                  std::to_string(c - 1) + "]");
  if (dlogits) *dlogits = Tensor<Real>(logits.shape);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const Real* z = logits.data() + static_cast<std::int64_t>(i) * c;
    Real m = z[0];
    for (int k = 1; k < c; ++k) m = std::max(m, z[k]);
    double s = 0.0;
    for (int k = 0; k < c; ++k) s += std::exp(static_cast<double>(z[k] - m));
    const double lse = static_cast<double>(m) + std::log(s);
    total += lse - static_cast<double>(z[labels[static_cast<size_t>(i)]]);
    if (dlogits) {
      Real* g = dlogits->data() + static_cast<std::int64_t>(i) * c;
      for (int k = 0; k < c; ++k)
        g[k] = static_cast<Real>(std::exp(static_cast<double>(z[k]) - lse) / n);
      g[labels[static_cast<size_t>(i)]] -= static_cast<Real>(1.0 / n);
    }
  }
  return static_cast<Real>(total / n);
}

template <typename Real>
Real accuracy(const Tensor<Real>& logits, const std::vector<int>& labels) {
  const int n = logits.dim(0), c = logits.dim(1);
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const Real* z = logits.data() + static_cast<std::int64_t>(i) * c;
    int best = 0;
    for (int k = 1; k < c; ++k)
      if (z[k] > z[best]) best = k;
    if (best == labels[static_cast<size_t>(i)]) ++hits;
  }
  return static_cast<Real>(static_cast<double>(hits) / n);
}

/// Normalized temperature-scaled cross entropy over 2N projections ordered
/// (a_1..a_N, b_1..b_N); the positive of row i is row (i+N) mod 2N. The loss
/// is averaged over all 2N anchors and each anchor's denominator runs over
/// the 2N-1 other rows. If dproj is given it receives the gradient.
template <typename Real>
Real nt_xent(const Tensor<Real>& projections, Real temperature, Tensor<Real>* dproj = nullptr) {
  if (projections.ndim() != 2) throw std::invalid_argument("nt_xent: projections must be (2N, D)");
  if (!(temperature > Real(0))) throw std::invalid_argument("nt_xent: temperature must be positive");
  const int m = projections.dim(0), d = projections.dim(1);
  if (m < 2 || m % 2 != 0) throw std::invalid_argument("nt_xent: need an even batch of at least 2");
  const int n = m / 2;

  std::vector<double> norm(static_cast<size_t>(m));
  std::vector<double> z(static_cast<size_t>(m) * d);  // row-normalized projections
  for (int i = 0; i < m; ++i) {
    const Real* u = projections.data() + static_cast<std::int64_t>(i) * d;
    double s = 0.0;
    for (int k = 0; k < d; ++k) s += static_cast<double>(u[k]) * static_cast<double>(u[k]);
    s = std::sqrt(s);
    if (!(s >= std::numeric_limits<double>::min()))
      throw std::invalid_argument("nt_xent: zero-norm projection at row " + std::to_string(i));
    norm[static_cast<size_t>(i)] = s;
    for (int k = 0; k < d; ++k) z[static_cast<size_t>(i) * d + k] = static_cast<double>(u[k]) / s;
  }

  const double tau = static_cast<double>(temperature);
  std::vector<double> sim(static_cast<size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += z[static_cast<size_t>(i) * d + k] * z[static_cast<size_t>(j) * d + k];
      sim[static_cast<size_t>(i) * m + j] = s / tau;
    }

  double total = 0.0;
  std::vector<double> dsim;
  if (dproj) dsim.assign(static_cast<size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    const int pos = (i + n) % m;
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j)
      if (j != i) mx = std::max(mx, sim[static_cast<size_t>(i) * m + j]);
    double s = 0.0;
    for (int j = 0; j < m; ++j)
      if (j != i) s += std::exp(sim[static_cast<size_t>(i) * m + j] - mx);
    const double lse = mx + std::log(s);
    total += lse - sim[static_cast<size_t>(i) * m + pos];
    if (dproj) {
      for (int j = 0; j < m; ++j) {
        if (j == i) continue;
        double g = std::exp(sim[static_cast<size_t>(i) * m + j] - lse);
        if (j == pos) g -= 1.0;
        dsim[static_cast<size_t>(i) * m + j] = g / m;
      }
    }
  }
  const double loss = total / m;

  if (dproj) {
    *dproj = Tensor<Real>(projections.shape);
    for (int i = 0; i < m; ++i) {
      // dz_i = sum_j (dsim_ij + dsim_ji) z_j / tau
      std::vector<double> dz(static_cast<size_t>(d), 0.0);
      for (int j = 0; j < m; ++j) {
        const double w = (dsim[static_cast<size_t>(i) * m + j] + dsim[static_cast<size_t>(j) * m + i]) / tau;
        if (w == 0.0) continue;
        for (int k = 0; k < d; ++k) dz[static_cast<size_t>(k)] += w * z[static_cast<size_t>(j) * d + k];
      }
      // back through the row normalization: du = (dz - z (z . dz)) / |u|
      double zdz = 0.0;
      for (int k = 0; k < d; ++k) zdz += z[static_cast<size_t>(i) * d + k] * dz[static_cast<size_t>(k)];
      Real* g = dproj->data() + static_cast<std::int64_t>(i) * d;
      for (int k = 0; k < d; ++k)
        g[k] = static_cast<Real>((dz[static_cast<size_t>(k)] - z[static_cast<size_t>(i) * d + k] * zdz) /
                                 norm[static_cast<size_t>(i)]);
    }
  }
  return static_cast<Real>(loss);
}

}  // namespace tta
