#pragma once

// Test-side oracles, independent of the library implementation paths they
// check. Gaussian moments come from the double-factorial closed form; the
// diagonal relaxation model has elementary coefficient formulas.

#include <array>
#include <cmath>
#include <random>

#include "vpb/types.hpp"

namespace oracle {

/// E[x^n] for x ~ N(0,1): (n-1)!! for even n, 0 for odd n.
inline double gaussian_moment_1d(int n) {
  if (n % 2 == 1) return 0.0;
  double m = 1.0;
  for (int k = n - 1; k > 1; k -= 2) m *= k;
  return m;
}

/// E[v1^p v2^q v3^r] for v ~ N(0, I_3).
inline double gaussian_moment(int p, int q, int r) {
  return gaussian_moment_1d(p) * gaussian_moment_1d(q) * gaussian_moment_1d(r);
}

inline vpb::CVector random_complex_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  vpb::CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = vpb::Complex(dist(rng), dist(rng));
  return v;
}

inline vpb::Vector random_real_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  vpb::Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

/// Rotation by angle about a unit axis.
inline vpb::Mat3 rotation_about(const vpb::Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

}  // namespace oracle
