#pragma once

#include <string>
#include <vector>

#include "tta/core/tensor.hpp"

namespace tta {

/// Which sub-network a parameter belongs to. Every trainable parameter
/// carries exactly one role; the three groups partition the full set.
enum class Role { encoder, primary, secondary };

inline const char* role_name(Role r) {
  switch (r) {
    case Role::encoder: return "encoder";
    case Role::primary: return "primary";
    case Role::secondary: return "secondary";
  }
  return "?";
}

template <typename Real>
struct Param {
  std::string name;
  Tensor<Real> value;
  Tensor<Real> grad;
  Role role = Role::encoder;
  bool affine = false;   // batch-norm scale/shift inside the encoder
  bool bn_stat = false;  // running statistic, not trainable

  bool trainable() const { return !bn_stat; }

  void init_shape(std::vector<int> shape) {
    value = Tensor<Real>(shape);
    grad = Tensor<Real>(std::move(shape));
  }

  void zero_grad() { grad.fill(Real(0)); }
};

}  // namespace tta
