#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fss/errors.hpp"

namespace fss {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const {
    if (!(lr > 0.0) || !(eps > 0.0) || !(beta1 >= 0.0) || beta1 >= 1.0 || !(beta2 >= 0.0) ||
        beta2 >= 1.0) {
      throw invalid_input("AdamConfig: need lr > 0, eps > 0, 0 <= beta < 1");
    }
  }
};

/// First/second moment accumulators of one optimisation run.
struct AdamState {
  std::uint64_t step_count = 0;
  std::vector<double> m;
  std::vector<double> v;
  AdamConfig config;

  static AdamState init(std::size_t dim, const AdamConfig& config = {}) {
    config.validate();
    AdamState s;
    s.m.assign(dim, 0.0);
    s.v.assign(dim, 0.0);
    s.config = config;
    return s;
  }
};

/// One bias-corrected Adam update, in place.
inline void adam_step(AdamState& state, std::vector<double>& params, std::span<const double> grad) {
  const std::size_t dim = params.size();
  if (grad.size() != dim || state.m.size() != dim || state.v.size() != dim) {
    throw invalid_input("adam_step: params, grad and state must have equal length");
  }
  for (double g : grad) {
    if (!std::isfinite(g)) {
      throw diverged_optimization("adam_step: non-finite gradient entry");
    }
  }
  const AdamConfig& c = state.config;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < dim; ++i) {
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grad[i];
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
  }
}

}  // namespace fss
