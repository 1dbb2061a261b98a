#pragma once

#include <cmath>
#include <vector>

#include "dctcrn/common.h"
#include "dctcrn/tensor.h"

namespace dctcrn {

// Adam with bias correction. Moment tensors mirror the parameter set; the
// step count lives here too, so one instance drives one training run.

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
class Adam {
 public:
  Adam(const ParameterSet<T>& params, AdamConfig cfg = {})
      : cfg_(cfg), m_(params.zeros_like()), v_(params.zeros_like()) {}

  int64_t steps() const { return t_; }

  // One update with the given learning rate. Gradients must be finite.
  void step(ParameterSet<T>& params, const ParameterSet<T>& grads, double lr) {
    require(lr > 0.0 && std::isfinite(lr), "adam: learning rate must be positive and finite");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
    for (size_t k = 0; k < params.entries.size(); ++k) {
      auto& entry = params.entries[k];
      const Tensor<T>& g = grads.get(entry.name);
      if (!all_finite(g.data)) throw std::runtime_error("non-finite gradient in tensor: " + entry.name);
      Tensor<T>& m = m_.entries[k].tensor;
      Tensor<T>& v = v_.entries[k].tensor;
      for (size_t i = 0; i < entry.tensor.data.size(); ++i) {
        const double gi = double(g.data[i]);
        const double mi = cfg_.beta1 * double(m.data[i]) + (1.0 - cfg_.beta1) * gi;
        const double vi = cfg_.beta2 * double(v.data[i]) + (1.0 - cfg_.beta2) * gi * gi;
        m.data[i] = T(mi);
        v.data[i] = T(vi);
        const double update = lr * (mi / bc1) / (std::sqrt(vi / bc2) + cfg_.eps);
        entry.tensor.data[i] = T(double(entry.tensor.data[i]) - update);
      }
    }
  }

 private:
  AdamConfig cfg_;
  ParameterSet<T> m_;
  ParameterSet<T> v_;
  int64_t t_ = 0;
};

// Euclidean norm over every gradient element.
template <typename T>
double global_grad_norm(const ParameterSet<T>& grads) {
  double ss = 0.0;
  for (const auto& e : grads.entries)
    for (const T& g : e.tensor.data) ss += double(g) * double(g);
  return std::sqrt(ss);
}

// Scales gradients in place when their global norm exceeds `max_norm`.
// Returns the pre-clip norm.
template <typename T>
double clip_grad_norm(ParameterSet<T>& grads, double max_norm) {
  require(max_norm > 0.0, "clip_grad_norm: max_norm must be > 0");
  const double norm = global_grad_norm(grads);
  if (norm > max_norm) {
    const T k = T(max_norm / norm);
    for (auto& e : grads.entries)
      for (T& g : e.tensor.data) g *= k;
  }
  return norm;
}

}  // namespace dctcrn
