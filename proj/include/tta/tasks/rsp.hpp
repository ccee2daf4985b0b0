#pragma once

#include "tta/core/rng.hpp"
#include "tta/data/pyramid.hpp"
#include "tta/tasks/losses.hpp"
#include "tta/tasks/permutation.hpp"

namespace tta {

/// One resolution-sequence example: the pyramid's patches in a drawn display
/// order plus the label encoding that order.
struct RspExample {
  std::array<const Image*, 3> patches;  // displayed order (views into the pyramid)
  int label = 0;
};

/// Draw a permutation uniformly and present the pyramid in that order.
inline RspExample make_rsp_example(const PatchPyramid& pyramid, Rng& rng) {
  RspExample ex;
  ex.label = rng.uniform_int(6);
  const auto order = order_of_label(ex.label);
  for (int i = 0; i < 3; ++i)
    ex.patches[static_cast<size_t>(i)] = &pyramid.patches[static_cast<size_t>(order[static_cast<size_t>(i)])];
  return ex;
}

/// Cross entropy over the 6 orderings.
template <typename Real>
Real rsp_loss(const Tensor<Real>& logits, const std::vector<int>& labels,
              Tensor<Real>* dlogits = nullptr) {
  if (logits.ndim() != 2 || logits.dim(1) != 6)
    throw std::invalid_argument("rsp_loss: logits must be (N, 6)");
  for (int y : labels)
    if (y < 0 || y > 5) throw std::invalid_argument("rsp_loss: label outside [0, 5]");
  return cross_entropy(logits, labels, dlogits);
}

}  // namespace tta
