#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "biaffine/errors.hpp"
#include "biaffine/tensor.hpp"

namespace biaffine {

/// Adam with exponentially annealed step size. beta2 defaults to .9 rather
/// than the usual .999 so the squared-gradient average forgets old spikes
/// quickly; the annealing exponent is continuous in the step counter.
struct AdamConfig {
  double alpha = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.9;
  double eps = 1e-12;
  double anneal_base = 0.75;
  double anneal_interval = 5000.0;
  long t_max = 50000;
};

inline double lr_at(const AdamConfig& cfg, double t) {
  if (t < 0) throw ContractError("lr_at: negative step");
  return cfg.alpha * std::pow(cfg.anneal_base, t / cfg.anneal_interval);
}

template <typename T>
class Adam {
 public:
  Adam(std::vector<TensorPtr<T>> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      m_[i].assign(params_[i]->data.size(), T(0));
      v_[i].assign(params_[i]->data.size(), T(0));
    }
  }

  long step_count() const { return t_; }
  double current_lr() const { return lr_at(cfg_, static_cast<double>(t_)); }
  const AdamConfig& config() const { return cfg_; }

  /// One update from the gradients accumulated in the parameters. Any
  /// non-finite gradient aborts the step before touching the state.
  void step() {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      for (T g : params_[i]->grad) {
        if (!std::isfinite(g)) {
          throw NumericError("adam: non-finite gradient at step " + std::to_string(t_ + 1));
        }
      }
    }
    const double lr = lr_at(cfg_, static_cast<double>(t_));
    const double b1 = cfg_.beta1, b2 = cfg_.beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(t_ + 1));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(t_ + 1));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& m = m_[i];
      auto& v = v_[i];
      auto& theta = params_[i]->data;
      const auto& grad = params_[i]->grad;
      for (std::size_t j = 0; j < theta.size(); ++j) {
        const double g = static_cast<double>(grad[j]);
        m[j] = static_cast<T>(b1 * m[j] + (1.0 - b1) * g);
        v[j] = static_cast<T>(b2 * v[j] + (1.0 - b2) * g * g);
        const double m_hat = m[j] / corr1;
        const double v_hat = v[j] / corr2;
        theta[j] -= static_cast<T>(lr * m_hat / (std::sqrt(v_hat) + cfg_.eps));
      }
    }
    ++t_;
  }

 private:
  std::vector<TensorPtr<T>> params_;
  AdamConfig cfg_;
  std::vector<std::vector<T>> m_, v_;
  long t_ = 0;
};

}  // namespace biaffine
