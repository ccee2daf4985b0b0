#pragma once

#include <cstring>
#include <vector>

// Row-major matrix kernels with a fixed, row-independent accumulation order:
// each output row is produced by a k-sequential sweep of rank-1 updates, so a
// row's result is a pure function of its own input row. Identical samples
// therefore produce bit-identical activations regardless of batch
// composition, which the episodic repeatability contracts lean on. Plain
// loops vectorize well enough here (tens of GFLOP/s at the shapes this
// project uses).

namespace tta {

/// C (M,N) = A (M,K) * B (K,N)
template <typename Real>
void matmul(const Real* __restrict a, const Real* __restrict b, Real* __restrict c, int m_rows,
            int k_dim, int n_cols) {
  for (int m = 0; m < m_rows; ++m) {
    const Real* arow = a + static_cast<std::int64_t>(m) * k_dim;
    Real* crow = c + static_cast<std::int64_t>(m) * n_cols;
    std::memset(crow, 0, sizeof(Real) * static_cast<size_t>(n_cols));
    for (int k = 0; k < k_dim; ++k) {
      const Real av = arow[k];
      if (av == Real(0)) continue;
      const Real* brow = b + static_cast<std::int64_t>(k) * n_cols;
      for (int n = 0; n < n_cols; ++n) crow[n] += av * brow[n];
    }
  }
}

/// C (K,N) += A(M,K)^T * G (M,N), the weight-gradient product.
template <typename Real>
void matmul_acc_at_b(const Real* __restrict a, const Real* __restrict g, Real* __restrict c,
                     int m_rows, int k_dim, int n_cols) {
  for (int m = 0; m < m_rows; ++m) {
    const Real* arow = a + static_cast<std::int64_t>(m) * k_dim;
    const Real* grow = g + static_cast<std::int64_t>(m) * n_cols;
    for (int k = 0; k < k_dim; ++k) {
      const Real av = arow[k];
      if (av == Real(0)) continue;
      Real* crow = c + static_cast<std::int64_t>(k) * n_cols;
      for (int n = 0; n < n_cols; ++n) crow[n] += av * grow[n];
    }
  }
}

/// B^T materialization for the input-gradient product C = G * B^T.
template <typename Real>
std::vector<Real> transposed(const Real* b, int rows, int cols) {
  std::vector<Real> bt(static_cast<size_t>(rows) * static_cast<size_t>(cols));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      bt[static_cast<size_t>(c) * static_cast<size_t>(rows) + static_cast<size_t>(r)] =
          b[static_cast<std::int64_t>(r) * cols + c];
  return bt;
}

}  // namespace tta
