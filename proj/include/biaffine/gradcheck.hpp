#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "biaffine/tensor.hpp"

namespace biaffine {

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Central finite-difference check of reverse-mode gradients.
///
/// `f` rebuilds the scalar loss from the current parameter values and must be
/// deterministic across calls (fix any dropout seeds before entering).
/// Run this at 64-bit only; float roundoff swamps the difference quotient.
///
/// `analytic_scale` deliberately corrupts the analytic gradient before the
/// comparison; tests use it as a negative control to prove the check can
/// actually catch a broken backward rule.
inline GradCheckResult grad_check(const std::function<TensorPtr<double>()>& f,
                                  const std::vector<std::pair<std::string, TensorPtr<double>>>& params,
                                  double eps = 1e-5, double analytic_scale = 1.0) {
  for (const auto& [name, p] : params) p->zero_grad();
  auto loss = f();
  backward(loss);

  GradCheckResult res;
  for (const auto& [name, p] : params) {
    for (std::size_t i = 0; i < p->data.size(); ++i) {
      const double analytic = p->grad[i] * analytic_scale;
      const double keep = p->data[i];
      p->data[i] = keep + eps;
      const double up = f()->item();
      p->data[i] = keep - eps;
      const double down = f()->item();
      p->data[i] = keep;
      const double numeric = (up - down) / (2.0 * eps);
      const double rel = std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst_param = name;
        res.worst_index = i;
        res.worst_analytic = analytic;
        res.worst_numeric = numeric;
      }
    }
  }
  return res;
}

}  // namespace biaffine
