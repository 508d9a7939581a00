#pragma once

#include <cmath>
#include <vector>

#include "gst/autodiff/parameter_store.hpp"
#include "gst/error.hpp"

namespace gst {

// base * rate^floor(epoch / every)
inline double DecayedLearningRate(double base, double rate, int every, int epoch) {
  if (every <= 0) throw ConfigError("decay interval must be positive");
  return base * std::pow(rate, epoch / every);
}

template <typename T>
class Adam {
 public:
  Adam(const ParameterStore<T>& store, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(store), v_(store) {}

  void Step(ParameterStore<T>& store, const Gradients<T>& grads) {
    ++t_;
    const double c1 = 1 - std::pow(beta1_, t_), c2 = 1 - std::pow(beta2_, t_);
    for (std::size_t p = 0; p < store.size(); ++p) {
      auto& w = store.MutableValue(p).values();
      auto& m = m_[p].values();
      auto& v = v_[p].values();
      const auto& g = grads[p].values();
      for (std::size_t k = 0; k < w.size(); ++k) {
        m[k] = static_cast<T>(beta1_ * m[k] + (1 - beta1_) * g[k]);
        v[k] = static_cast<T>(beta2_ * v[k] + (1 - beta2_) * g[k] * g[k]);
        const double mh = m[k] / c1, vh = v[k] / c2;
        w[k] -= static_cast<T>(lr_ * mh / (std::sqrt(vh) + eps_));
      }
    }
  }

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  Gradients<T> m_, v_;
};

// v = mu v + g; w -= lr v.
template <typename T>
class MomentumSgd {
 public:
  MomentumSgd(const ParameterStore<T>& store, double lr, double momentum = 0.9)
      : lr_(lr), momentum_(momentum), velocity_(store) {}

  void Step(ParameterStore<T>& store, const Gradients<T>& grads) {
    for (std::size_t p = 0; p < store.size(); ++p) {
      auto& w = store.MutableValue(p).values();
      auto& v = velocity_[p].values();
      const auto& g = grads[p].values();
      for (std::size_t k = 0; k < w.size(); ++k) {
        v[k] = static_cast<T>(momentum_ * v[k] + g[k]);
        w[k] -= static_cast<T>(lr_ * v[k]);
      }
    }
  }

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

 private:
  double lr_, momentum_;
  Gradients<T> velocity_;
};

}  // namespace gst
