#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "fss/errors.hpp"
#include "fss/rng.hpp"

namespace fss {

/// Fully connected ReLU network mapping a raw geometry vector to
/// log-circuit-parameter deltas. Inputs are normalised to [0,1] with the
/// stored per-input ranges; the exponential of (output + output_offset)
/// yields the strictly positive circuit parameters.
struct MlpModel {
  std::vector<std::size_t> layer_sizes;            // input, hidden..., output
  std::vector<std::vector<double>> weights;        // per layer, row-major out x in
  std::vector<std::vector<double>> biases;         // per layer
  std::vector<std::pair<double, double>> input_norm;  // per input (min, max)
  std::vector<double> output_offset;               // per output, log reference

  std::size_t input_dim() const { return layer_sizes.empty() ? 0 : layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.empty() ? 0 : layer_sizes.back(); }

  void validate() const {
    if (layer_sizes.size() < 2) {
      throw invalid_input("MlpModel: need at least input and output layers");
    }
    const std::size_t n_layers = layer_sizes.size() - 1;
    if (weights.size() != n_layers || biases.size() != n_layers) {
      throw invalid_input("MlpModel: weight/bias count must match layer count");
    }
    for (std::size_t l = 0; l < n_layers; ++l) {
      if (weights[l].size() != layer_sizes[l] * layer_sizes[l + 1] ||
          biases[l].size() != layer_sizes[l + 1]) {
        throw invalid_input("MlpModel: weight matrix shape mismatch at layer " + std::to_string(l));
      }
    }
    if (input_norm.size() != input_dim() || output_offset.size() != output_dim()) {
      throw invalid_input("MlpModel: normalisation/offset size mismatch");
    }
    for (const auto& [lo, hi] : input_norm) {
      if (!(lo < hi)) {
        throw invalid_input("MlpModel: input_norm min must be strictly below max");
      }
    }
  }
};

/// Glorot-uniform weights, zero biases.
inline MlpModel make_mlp(std::vector<std::size_t> layer_sizes,
                         std::vector<std::pair<double, double>> input_norm,
                         std::vector<double> output_offset, SplitMix64& rng) {
  MlpModel m;
  m.layer_sizes = std::move(layer_sizes);
  m.input_norm = std::move(input_norm);
  m.output_offset = std::move(output_offset);
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    const std::size_t fan_in = m.layer_sizes[l];
    const std::size_t fan_out = m.layer_sizes[l + 1];
    const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<double> w(fan_in * fan_out);
    for (double& x : w) x = rng.uniform(-r, r);
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::vector<double>(fan_out, 0.0));
  }
  m.validate();
  return m;
}

/// Post-activation values per layer, kept for backprop.
struct MlpTrace {
  std::vector<std::vector<double>> activations;  // activations[0] = normalised input
};

/// Raw linear output (before offset and exponential).
inline std::vector<double> mlp_forward_raw(const MlpModel& model, std::span<const double> geometry,
                                           MlpTrace* trace = nullptr) {
  if (geometry.size() != model.input_dim()) {
    throw invalid_input("mlp_forward: geometry dimension mismatch");
  }
  std::vector<double> x(geometry.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& [lo, hi] = model.input_norm[i];
    x[i] = (geometry[i] - lo) / (hi - lo);
  }
  if (trace) {
    trace->activations.clear();
    trace->activations.push_back(x);
  }
  const std::size_t n_layers = model.weights.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t in = model.layer_sizes[l];
    const std::size_t out = model.layer_sizes[l + 1];
    std::vector<double> y(out);
    for (std::size_t r = 0; r < out; ++r) {
      double acc = model.biases[l][r];
      const double* row = model.weights[l].data() + r * in;
      for (std::size_t c = 0; c < in; ++c) acc += row[c] * x[c];
      y[r] = acc;
    }
    if (l + 1 < n_layers) {
      for (double& v : y) v = v > 0.0 ? v : 0.0;  // ReLU on hidden layers
    }
    if (trace) trace->activations.push_back(y);
    x = std::move(y);
  }
  return x;
}

/// Positive circuit-parameter vector in the stack flat layout.
inline std::vector<double> mlp_forward(const MlpModel& model, std::span<const double> geometry) {
  std::vector<double> out = mlp_forward_raw(model, geometry);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(out[i] + model.output_offset[i]);
  }
  return out;
}

struct MlpGradient {
  std::vector<std::vector<double>> d_weights;
  std::vector<std::vector<double>> d_biases;

  static MlpGradient zeros_like(const MlpModel& m) {
    MlpGradient g;
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
      g.d_weights.emplace_back(m.weights[l].size(), 0.0);
      g.d_biases.emplace_back(m.biases[l].size(), 0.0);
    }
    return g;
  }

  void accumulate(const MlpGradient& other, double scale = 1.0) {
    for (std::size_t l = 0; l < d_weights.size(); ++l) {
      for (std::size_t i = 0; i < d_weights[l].size(); ++i) {
        d_weights[l][i] += scale * other.d_weights[l][i];
      }
      for (std::size_t i = 0; i < d_biases[l].size(); ++i) {
        d_biases[l][i] += scale * other.d_biases[l][i];
      }
    }
  }
};

/// Exact gradients of J with respect to every weight and bias, given
/// output_grad = dJ/d(raw output). ReLU subgradient at 0 is taken as 0.
inline MlpGradient mlp_backward(const MlpModel& model, std::span<const double> geometry,
                                std::span<const double> output_grad) {
  if (output_grad.size() != model.output_dim()) {
    throw invalid_input("mlp_backward: output_grad dimension mismatch");
  }
  MlpTrace trace;
  mlp_forward_raw(model, geometry, &trace);

  MlpGradient grad = MlpGradient::zeros_like(model);
  std::vector<double> delta(output_grad.begin(), output_grad.end());
  for (std::size_t l = model.weights.size(); l-- > 0;) {
    const std::size_t in = model.layer_sizes[l];
    const std::size_t out = model.layer_sizes[l + 1];
    const std::vector<double>& x = trace.activations[l];
    for (std::size_t r = 0; r < out; ++r) {
      grad.d_biases[l][r] = delta[r];
      double* wrow = grad.d_weights[l].data() + r * in;
      for (std::size_t c = 0; c < in; ++c) wrow[c] = delta[r] * x[c];
    }
    if (l == 0) break;
    std::vector<double> prev(in, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
      const double* row = model.weights[l].data() + r * in;
      for (std::size_t c = 0; c < in; ++c) prev[c] += delta[r] * row[c];
    }
    // Gate through the ReLU of the layer below (its stored post-activation).
    for (std::size_t c = 0; c < in; ++c) {
      if (!(trace.activations[l][c] > 0.0)) prev[c] = 0.0;
    }
    delta = std::move(prev);
  }
  return grad;
}

// Flat views used by the optimiser.

inline std::size_t mlp_param_count(const MlpModel& m) {
  std::size_t n = 0;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    n += m.weights[l].size() + m.biases[l].size();
  }
  return n;
}

inline std::vector<double> mlp_flatten(const MlpModel& m) {
  std::vector<double> out;
  out.reserve(mlp_param_count(m));
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    out.insert(out.end(), m.weights[l].begin(), m.weights[l].end());
    out.insert(out.end(), m.biases[l].begin(), m.biases[l].end());
  }
  return out;
}

inline void mlp_unflatten(std::span<const double> flat, MlpModel& m) {
  if (flat.size() != mlp_param_count(m)) {
    throw invalid_input("mlp_unflatten: flat vector has wrong length");
  }
  std::size_t at = 0;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    for (double& w : m.weights[l]) w = flat[at++];
    for (double& b : m.biases[l]) b = flat[at++];
  }
}

inline std::vector<double> mlp_grad_flatten(const MlpGradient& g) {
  std::vector<double> out;
  for (std::size_t l = 0; l < g.d_weights.size(); ++l) {
    out.insert(out.end(), g.d_weights[l].begin(), g.d_weights[l].end());
    out.insert(out.end(), g.d_biases[l].begin(), g.d_biases[l].end());
  }
  return out;
}

}  // namespace fss
