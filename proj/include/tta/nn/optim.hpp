#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tta/nn/param.hpp"

namespace tta {

/// Adam over an explicit parameter subset (framework-default hyperparameters:
/// beta1=0.9, beta2=0.999, eps=1e-8). Parameters outside the subset are never
/// read or written, which is what the frozen-head contracts rely on.
template <typename Real>
class Adam {
 public:
  explicit Adam(std::vector<Param<Real>*> params, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (auto* p : params_) {
      if (!p->trainable()) throw std::invalid_argument("adam: non-trainable parameter " + p->name);
      m_.emplace_back(p->value.shape);
      v_.emplace_back(p->value.shape);
    }
  }

  void zero_grad() {
    for (auto* p : params_) p->zero_grad();
  }

  void step(double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t k = 0; k < params_.size(); ++k) {
      auto& value = params_[k]->value;
      const auto& grad = params_[k]->grad;
      auto& m = m_[k];
      auto& v = v_[k];
      for (std::int64_t i = 0; i < value.size(); ++i) {
        const Real g = grad[i];
        m[i] = static_cast<Real>(beta1_) * m[i] + static_cast<Real>(1.0 - beta1_) * g;
        v[i] = static_cast<Real>(beta2_) * v[i] + static_cast<Real>(1.0 - beta2_) * g * g;
        const double mhat = static_cast<double>(m[i]) / bc1;
        const double vhat = static_cast<double>(v[i]) / bc2;
        value[i] -= static_cast<Real>(lr * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

  const std::vector<Param<Real>*>& params() const { return params_; }

 private:
  std::vector<Param<Real>*> params_;
  std::vector<Tensor<Real>> m_, v_;
  double beta1_, beta2_, eps_;
  long t_ = 0;
};

/// One plain gradient-descent update, the stateless test-time optimizer.
/// step_size == 0 applies nothing, keeping the eta=0 contracts bit-exact.
template <typename Real>
void sgd_step(const std::vector<Param<Real>*>& params, double step_size) {
  if (step_size == 0.0) return;
  for (auto* p : params)
    for (std::int64_t i = 0; i < p->value.size(); ++i)
      p->value[i] -= static_cast<Real>(step_size) * p->grad[i];
}

}  // namespace tta
