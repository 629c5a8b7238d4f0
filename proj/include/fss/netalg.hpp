#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>

#include "fss/constants.hpp"
#include "fss/errors.hpp"

namespace fss {

using cdbl = std::complex<double>;

inline bool is_finite(cdbl v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

/// Chain (ABCD) matrix of a reciprocal two-port. a,d dimensionless,
/// b in ohm, c in siemens; ad - bc = 1 for everything built here.
struct ComplexTwoPort {
  cdbl a{1.0};
  cdbl b{0.0};
  cdbl c{0.0};
  cdbl d{1.0};

  cdbl det() const { return a * d - b * c; }

  friend ComplexTwoPort operator*(const ComplexTwoPort& l, const ComplexTwoPort& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
            l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
  }
};

/// Scattering matrix with its reference impedance.
struct SMatrix {
  cdbl s11{0.0};
  cdbl s21{1.0};
  cdbl s12{1.0};
  cdbl s22{0.0};
  double z_ref{1.0};  // ohm
};

/// [[1,0],[y,1]]
inline ComplexTwoPort abcd_shunt(cdbl y) {
  if (!is_finite(y)) {
    throw invalid_input("abcd_shunt: admittance must be finite");
  }
  return {1.0, 0.0, y, 1.0};
}

/// Lossless line of physical length d in a medium of relative permittivity
/// eps_r; the line impedance is z_ref_medium / sqrt(eps_r).
inline ComplexTwoPort abcd_tline(double d, double freq, double eps_r, double z_ref_medium) {
  if (!(d >= 0.0) || !std::isfinite(d)) {
    throw invalid_input("abcd_tline: length must be finite and >= 0");
  }
  if (!(freq > 0.0) || !std::isfinite(freq)) {
    throw invalid_input("abcd_tline: frequency must be finite and > 0");
  }
  if (!(eps_r >= 1.0) || !(z_ref_medium > 0.0)) {
    throw invalid_input("abcd_tline: need eps_r >= 1 and z_ref_medium > 0");
  }
  const double root_eps = std::sqrt(eps_r);
  const double beta = 2.0 * std::numbers::pi * freq * root_eps / speed_of_light;
  const double z = z_ref_medium / root_eps;
  const double bd = beta * d;
  const double cs = std::cos(bd);
  const double sn = std::sin(bd);
  return {cdbl(cs, 0.0), cdbl(0.0, z * sn), cdbl(0.0, sn / z), cdbl(cs, 0.0)};
}

/// Left-to-right product; port 1 of the result is port 1 of nets[0].
inline ComplexTwoPort cascade(std::span<const ComplexTwoPort> nets) {
  if (nets.empty()) {
    throw invalid_input("cascade: empty network list");
  }
  ComplexTwoPort acc = nets[0];
  for (std::size_t i = 1; i < nets.size(); ++i) {
    acc = acc * nets[i];
  }
  return acc;
}

inline ComplexTwoPort cascade(std::initializer_list<ComplexTwoPort> nets) {
  return cascade(std::span<const ComplexTwoPort>(nets.begin(), nets.size()));
}

/// Equal-reference-impedance ABCD -> S conversion.
inline SMatrix abcd_to_s(const ComplexTwoPort& net, double z_ref) {
  if (!(z_ref > 0.0) || !std::isfinite(z_ref)) {
    throw invalid_input("abcd_to_s: z_ref must be finite and > 0");
  }
  const cdbl b_over_z = net.b / z_ref;
  const cdbl c_times_z = net.c * z_ref;
  const cdbl delta = net.a + b_over_z + c_times_z + net.d;
  if (std::abs(delta) < 1e-30) {
    throw singular_conversion("abcd_to_s: conversion denominator vanished");
  }
  SMatrix s;
  s.s11 = (net.a + b_over_z - c_times_z - net.d) / delta;
  s.s21 = 2.0 / delta;
  s.s12 = 2.0 * net.det() / delta;
  s.s22 = (-net.a + b_over_z - c_times_z + net.d) / delta;
  s.z_ref = z_ref;
  return s;
}

}  // namespace fss
