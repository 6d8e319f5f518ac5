#pragma once

// Closed-form and brute-force reference values, written without the library's
// numerics so that tests compare against something independent.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>

namespace oracle {

using Complex = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

/// Energy of a degree-d rational map onto the unit sphere.
inline double sphere_energy(int degree) { return 4.0 * pi * degree; }

/// Energy of z -> k z on the disk of radius rho.
inline double linear_disk_energy(double k, double rho) {
  const double s = k * k * rho * rho;
  return 4.0 * pi * s / (1.0 + s);
}

/// Neck scale for mass M spread uniformly on the unit disk about q = 0:
/// M (1 - s^2) = eps, t = s / (1 + s).
inline double uniform_disk_t(double mass, double eps) {
  const double s = std::sqrt(1.0 - eps / mass);
  return s / (1.0 + s);
}

/// Mass of an isotropic Gaussian of total mass M outside radius s about its center.
inline double gaussian_outside(double mass, double sigma, double s) {
  return mass * std::exp(-0.5 * s * s / (sigma * sigma));
}

/// Alpha of the linear torus field f(t, theta) = (a t, b theta).
inline double torus_alpha(double a, double b) { return pi * (a * a - b * b); }

/// Energy of the degree-one bubble outside radius R once rescaled so that
/// the unit disk leaves mass eps outside: 4 pi / (1 + c^2 R^2).
inline double bubble_tail(double eps, double R) {
  const double c2 = 4.0 * pi / eps - 1.0;
  return 4.0 * pi / (1.0 + c2 * R * R);
}

/// Number of boundary strata of the moduli space of stable genus-0 curves
/// with n labelled marks (Schroeder's fourth problem), n = 3..6.
inline int genus0_strata(int n) {
  constexpr int table[] = {1, 4, 26, 236};
  return table[n - 3];
}

/// Plain loop over particles.
inline double brute_mass_in(std::span<const Complex> pts, std::span<const double> w, Complex c,
                            double r) {
  double m = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (std::abs(pts[i] - c) <= r) m += w[i];
  return m;
}

inline bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::abs(b);
}

}  // namespace oracle
