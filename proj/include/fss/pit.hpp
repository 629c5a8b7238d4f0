#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fss/constants.hpp"
#include "fss/errors.hpp"
#include "fss/netalg.hpp"

namespace fss {

// Relative guard below each explicit-harmonic cutoff; closer than this the
// TM modal admittance blows up and evaluation is refused.
inline constexpr double cutoff_guard_rel = 1e-6;

/// Square unit cell of the periodic screen lattice.
struct UnitCellSpec {
  double period = 18e-3;      // m, lattice pitch
  double slot_width = 1e-3;   // m
  double eps_r = 1.0;         // medium between screens

  void validate() const {
    if (!(period > 0.0) || !(slot_width > 0.0) || !(slot_width < period) || !(eps_r >= 1.0)) {
      throw invalid_input("UnitCellSpec: need 0 < slot_width < period and eps_r >= 1");
    }
  }
};

/// Circuit parameters of one perforated screen: fundamental LC branch plus
/// one weight per explicitly modelled TE/TM Floquet harmonic.
struct ScreenParams {
  double l0 = 0.0;              // H
  double c0 = 0.0;              // F
  std::vector<double> alpha_l;  // TE harmonic weights, size N_TE
  std::vector<double> alpha_c;  // TM harmonic weights, size N_TM

  std::size_t param_count() const { return 2 + alpha_l.size() + alpha_c.size(); }

  void validate() const {
    if (!(l0 > 0.0) || !std::isfinite(l0) || !(c0 > 0.0) || !std::isfinite(c0)) {
      throw invalid_input("ScreenParams: l0 and c0 must be finite and > 0");
    }
    if (alpha_l.empty() || alpha_c.empty()) {
      throw invalid_input("ScreenParams: need at least one TE and one TM harmonic weight");
    }
    for (double a : alpha_l) {
      if (!(a > 0.0) || !std::isfinite(a)) {
        throw invalid_input("ScreenParams: alpha_l entries must be finite and > 0");
      }
    }
    for (double a : alpha_c) {
      if (!(a > 0.0) || !std::isfinite(a)) {
        throw invalid_input("ScreenParams: alpha_c entries must be finite and > 0");
      }
    }
  }
};

/// Ordered screens and the effective separations between them.
struct StackCircuit {
  std::vector<ScreenParams> screens;
  std::vector<double> distances;  // m, size screens.size()-1
  UnitCellSpec cell;

  void validate() const {
    cell.validate();
    if (screens.empty()) {
      throw invalid_input("StackCircuit: need at least one screen");
    }
    if (distances.size() + 1 != screens.size()) {
      throw invalid_input("StackCircuit: need exactly one distance per adjacent screen pair");
    }
    for (const auto& s : screens) s.validate();
    for (double d : distances) {
      if (!(d > 0.0) || !std::isfinite(d)) {
        throw invalid_input("StackCircuit: distances must be finite and > 0");
      }
    }
  }

  int max_harmonic() const {
    std::size_t m = 1;
    for (const auto& s : screens) {
      m = std::max({m, s.alpha_l.size(), s.alpha_c.size()});
    }
    return static_cast<int>(m);
  }

  /// Flat layout: per screen [l0, c0, alpha_l..., alpha_c...], then distances.
  std::size_t param_count() const {
    std::size_t n = distances.size();
    for (const auto& s : screens) n += s.param_count();
    return n;
  }
};

struct FrequencyGrid {
  std::vector<double> points;  // Hz, strictly increasing

  static FrequencyGrid uniform(double f_min, double f_max, std::size_t n) {
    if (!(f_min > 0.0) || !(f_max > f_min) || n < 2) {
      throw invalid_input("FrequencyGrid: need 0 < f_min < f_max and n >= 2");
    }
    FrequencyGrid g;
    g.points.resize(n);
    const double step = (f_max - f_min) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      g.points[j] = f_min + static_cast<double>(j) * step;
    }
    g.points[n - 1] = f_max;
    return g;
  }

  std::size_t size() const { return points.size(); }

  void validate() const {
    if (points.empty()) {
      throw invalid_input("FrequencyGrid: empty grid");
    }
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (!(points[j] > 0.0) || !std::isfinite(points[j])) {
        throw invalid_input("FrequencyGrid: frequencies must be finite and > 0");
      }
      if (j > 0 && !(points[j] > points[j - 1])) {
        throw invalid_input("FrequencyGrid: frequencies must be strictly increasing");
      }
    }
  }
};

/// Cutoff of the k-th explicit harmonic: k*c0/(p*sqrt(eps_r)).
inline double harmonic_cutoff(const UnitCellSpec& cell, int k) {
  return static_cast<double>(k) * speed_of_light / (cell.period * std::sqrt(cell.eps_r));
}

struct ModalAdmittances {
  cdbl te;  // Im < 0 below cutoff (inductive)
  cdbl tm;  // Im > 0 below cutoff (capacitive)
};

/// Wave admittances of the k-th evanescent TE/TM Floquet harmonic at normal
/// incidence on a square lattice (k_t = 2*pi*k/p, degenerate pairs lumped).
inline ModalAdmittances floquet_admittances(const UnitCellSpec& cell, int k, double freq) {
  cell.validate();
  if (k < 1) {
    throw invalid_input("floquet_admittances: harmonic index must be >= 1");
  }
  if (!(freq > 0.0) || !std::isfinite(freq)) {
    throw invalid_input("floquet_admittances: frequency must be finite and > 0");
  }
  const double cutoff = harmonic_cutoff(cell, k);
  if (!(freq < cutoff * (1.0 - cutoff_guard_rel))) {
    throw cutoff_singularity("floquet_admittances: frequency inside the guard band of harmonic " +
                             std::to_string(k) + " (cutoff " + std::to_string(cutoff) + " Hz)");
  }
  const double w = 2.0 * std::numbers::pi * freq;
  const double k0 = w * std::sqrt(cell.eps_r) / speed_of_light;
  const double kt = 2.0 * std::numbers::pi * static_cast<double>(k) / cell.period;
  const double q = std::sqrt(kt * kt - k0 * k0);  // k_z = -j*q, evanescent branch
  return {cdbl(0.0, -q / (w * mu0)), cdbl(0.0, w * eps0 * cell.eps_r / q)};
}

/// Equivalent shunt admittance of one screen: fundamental LC branch plus the
/// explicitly modelled evanescent harmonics. Purely imaginary for real
/// parameters below cutoff, so the circuit stays lossless.
inline cdbl y_eq(const ScreenParams& screen, const UnitCellSpec& cell, double freq) {
  const double w = 2.0 * std::numbers::pi * freq;
  cdbl y(0.0, -1.0 / (w * screen.l0));
  y += cdbl(0.0, w * screen.c0);
  for (std::size_t k = 0; k < screen.alpha_l.size(); ++k) {
    y += screen.alpha_l[k] * floquet_admittances(cell, static_cast<int>(k) + 1, freq).te;
  }
  for (std::size_t k = 0; k < screen.alpha_c.size(); ++k) {
    y += screen.alpha_c[k] * floquet_admittances(cell, static_cast<int>(k) + 1, freq).tm;
  }
  return y;
}

inline void ensure_grid_valid(const FrequencyGrid& grid, const UnitCellSpec& cell) {
  grid.validate();
  cell.validate();
  // Only the first cutoff binds; higher harmonics cut off above it.
  const double bound = harmonic_cutoff(cell, 1) * (1.0 - cutoff_guard_rel);
  if (!(grid.points.back() < bound)) {
    throw cutoff_singularity("frequency grid reaches the first harmonic cutoff guard band");
  }
}

namespace detail {

/// Element matrices of the Fig.-style shunt/line cascade at one frequency,
/// in cascade order shunt_0, line_0, shunt_1, ..., shunt_{N-1}.
inline void build_elements(const StackCircuit& stack, double freq,
                           std::vector<ComplexTwoPort>& mats, std::vector<cdbl>* admittances) {
  const std::size_t n = stack.screens.size();
  mats.clear();
  mats.reserve(2 * n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      mats.push_back(abcd_tline(stack.distances[i - 1], freq, stack.cell.eps_r, eta0));
    }
    const cdbl y = y_eq(stack.screens[i], stack.cell, freq);
    if (admittances) admittances->push_back(y);
    mats.push_back(abcd_shunt(y));
  }
}

}  // namespace detail

/// Full scattering matrix of the stack at one frequency, referenced to the
/// plane-wave impedance of the inter-screen medium.
inline SMatrix stack_smatrix(const StackCircuit& stack, double freq) {
  stack.validate();
  std::vector<ComplexTwoPort> mats;
  detail::build_elements(stack, freq, mats, nullptr);
  return abcd_to_s(cascade(mats), eta0 / std::sqrt(stack.cell.eps_r));
}

/// Transmission coefficient per grid frequency.
inline std::vector<cdbl> stack_s21(const StackCircuit& stack, const FrequencyGrid& grid) {
  stack.validate();
  ensure_grid_valid(grid, stack.cell);
  const double z0 = eta0 / std::sqrt(stack.cell.eps_r);
  std::vector<cdbl> out;
  out.reserve(grid.size());
  std::vector<ComplexTwoPort> mats;
  for (double f : grid.points) {
    detail::build_elements(stack, f, mats, nullptr);
    out.push_back(abcd_to_s(cascade(mats), z0).s21);
  }
  return out;
}

inline std::vector<double> pack_params(const StackCircuit& stack) {
  std::vector<double> out;
  out.reserve(stack.param_count());
  for (const auto& s : stack.screens) {
    out.push_back(s.l0);
    out.push_back(s.c0);
    out.insert(out.end(), s.alpha_l.begin(), s.alpha_l.end());
    out.insert(out.end(), s.alpha_c.begin(), s.alpha_c.end());
  }
  out.insert(out.end(), stack.distances.begin(), stack.distances.end());
  return out;
}

/// Rebuilds a stack from the flat layout; `prototype` supplies screen count,
/// harmonic counts and the unit cell.
inline StackCircuit unpack_params(std::span<const double> flat, const StackCircuit& prototype) {
  if (flat.size() != prototype.param_count()) {
    throw invalid_input("unpack_params: flat vector has wrong length");
  }
  StackCircuit out = prototype;
  std::size_t at = 0;
  for (auto& s : out.screens) {
    s.l0 = flat[at++];
    s.c0 = flat[at++];
    for (double& a : s.alpha_l) a = flat[at++];
    for (double& a : s.alpha_c) a = flat[at++];
  }
  for (double& d : out.distances) d = flat[at++];
  return out;
}

/// Report labels for the flat layout, 1-based as in circuit notation.
inline std::vector<std::string> param_names(const StackCircuit& stack) {
  std::vector<std::string> names;
  names.reserve(stack.param_count());
  for (std::size_t i = 0; i < stack.screens.size(); ++i) {
    const std::string idx = std::to_string(i + 1);
    const auto& s = stack.screens[i];
    names.push_back("L0_" + idx + " (H)");
    names.push_back("C0_" + idx + " (F)");
    for (std::size_t k = 0; k < s.alpha_l.size(); ++k) {
      names.push_back(s.alpha_l.size() == 1 ? "alphaL_" + idx
                                            : "alphaL_" + idx + "_" + std::to_string(k + 1));
    }
    for (std::size_t k = 0; k < s.alpha_c.size(); ++k) {
      names.push_back(s.alpha_c.size() == 1 ? "alphaC_" + idx
                                            : "alphaC_" + idx + "_" + std::to_string(k + 1));
    }
  }
  for (std::size_t i = 0; i + 1 < stack.screens.size(); ++i) {
    names.push_back("d_" + std::to_string(i + 1) + " (mm)");
  }
  return names;
}

/// Gradient of Re[sum_j conj(adjoint_j) * s21(f_j)] with respect to every
/// circuit parameter in the flat layout. Exact chain rule through the 2x2
/// cascade: with prefix P and suffix S around element E, a perturbation dE
/// moves the global matrix by P*dE*S, and s21 = 2/Delta turns that into
/// ds21 = -(2/Delta^2) * (dA + dB/z0 + dC*z0 + dD).
inline std::vector<double> stack_s21_grad(const StackCircuit& stack, const FrequencyGrid& grid,
                                          std::span<const cdbl> adjoint) {
  stack.validate();
  ensure_grid_valid(grid, stack.cell);
  if (adjoint.size() != grid.size()) {
    throw invalid_input("stack_s21_grad: adjoint length must match the grid");
  }
  const std::size_t n = stack.screens.size();
  const std::size_t n_elems = 2 * n - 1;
  const double root_eps = std::sqrt(stack.cell.eps_r);
  const double z0 = eta0 / root_eps;

  std::vector<double> grad(stack.param_count(), 0.0);
  const std::size_t dist_base = stack.param_count() - stack.distances.size();

  std::vector<ComplexTwoPort> mats, prefix(n_elems + 1), suffix(n_elems + 1);
  std::vector<cdbl> te(static_cast<std::size_t>(stack.max_harmonic()));
  std::vector<cdbl> tm(te.size());

  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double f = grid.points[j];
    const cdbl weight = std::conj(adjoint[j]);
    if (weight == cdbl(0.0, 0.0)) continue;

    for (std::size_t k = 0; k < te.size(); ++k) {
      const auto modal = floquet_admittances(stack.cell, static_cast<int>(k) + 1, f);
      te[k] = modal.te;
      tm[k] = modal.tm;
    }
    detail::build_elements(stack, f, mats, nullptr);

    prefix[0] = ComplexTwoPort{};
    for (std::size_t e = 0; e < n_elems; ++e) prefix[e + 1] = prefix[e] * mats[e];
    suffix[n_elems] = ComplexTwoPort{};
    for (std::size_t e = n_elems; e-- > 0;) suffix[e] = mats[e] * suffix[e + 1];

    const ComplexTwoPort& total = prefix[n_elems];
    const cdbl delta = total.a + total.b / z0 + total.c * z0 + total.d;
    if (std::abs(delta) < 1e-30) {
      throw singular_conversion("stack_s21_grad: conversion denominator vanished");
    }
    const cdbl gs = -2.0 / (delta * delta);  // ds21 / dDelta terms share this factor

    const double w = 2.0 * std::numbers::pi * f;
    std::size_t at = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t e = 2 * i;  // shunt position in the cascade
      const ComplexTwoPort& p = prefix[e];
      const ComplexTwoPort& s = suffix[e + 1];
      // dM = dy * [[p.b, 0],[p.d, 0]] * S  ->  scalar sensitivity to dy:
      const cdbl k_shunt =
          gs * (p.b * s.a + (p.b * s.b) / z0 + (p.d * s.a) * z0 + p.d * s.b);
      const cdbl sens = weight * k_shunt;
      const ScreenParams& sc = stack.screens[i];
      // dy/dl0 = +j/(w*l0^2); dy/dc0 = j*w; dy/dalpha = modal admittance.
      grad[at++] += (sens * cdbl(0.0, 1.0 / (w * sc.l0 * sc.l0))).real();
      grad[at++] += (sens * cdbl(0.0, w)).real();
      for (std::size_t k = 0; k < sc.alpha_l.size(); ++k) grad[at++] += (sens * te[k]).real();
      for (std::size_t k = 0; k < sc.alpha_c.size(); ++k) grad[at++] += (sens * tm[k]).real();
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t e = 2 * i + 1;  // line position
      const double beta = w * root_eps / speed_of_light;
      const double bd = beta * stack.distances[i];
      const double cs = std::cos(bd);
      const double sn = std::sin(bd);
      const ComplexTwoPort de{cdbl(-beta * sn, 0.0), cdbl(0.0, beta * z0 * cs),
                              cdbl(0.0, beta * cs / z0), cdbl(-beta * sn, 0.0)};
      const ComplexTwoPort dm = prefix[e] * de * suffix[e + 1];
      const cdbl ds = gs * (dm.a + dm.b / z0 + dm.c * z0 + dm.d);
      grad[dist_base + i] += (weight * ds).real();
    }
  }
  return grad;
}

}  // namespace fss
