#pragma once

#include <functional>
#include <map>
#include <vector>

#include "vpb/types.hpp"

namespace vpb {

/// Gauss-Hermite rule for the standard Gaussian measure N(0,1):
/// integral of f dN ~ sum_i weights[i] * f(nodes[i]).
struct Quadrature1d {
  Vector nodes;
  Vector weights;
};

Quadrature1d gauss_hermite_prob(int n);

/// Orthonormal tensor Hermite basis of L^2(R^3) relative to the global
/// Maxwellian: phi_k(v) = H~_{k1}(v1) H~_{k2}(v2) H~_{k3}(v3) sqrt(M),
/// truncated by total degree K, indices in graded lexicographic order.
/// All plain-dv integrals of basis-pair products are exact with the
/// stored quadrature (at least K+2 nodes per axis).
class HermiteBasis {
 public:
  static constexpr int kDegreeCap = 12;

  explicit HermiteBasis(int max_total_degree, int nodes_per_axis = 0);

  int degree() const { return degree_; }
  int dimension() const { return static_cast<int>(index_map_.size()); }
  const std::vector<MultiIndex>& index_map() const { return index_map_; }
  int index_of(const MultiIndex& k) const;
  const Quadrature1d& quadrature() const { return quad_; }

  /// Orthonormal Hermite polynomial values H~_0..H~_K at x.
  void hermite_values(Real x, Vector& out) const;

  /// Polynomial parts H_a(v) of all basis functions at a point.
  Vector evaluate_all(const Vec3& v) const;

  /// Coefficients of p(v) sqrt(M) in the basis, by tensor quadrature;
  /// exact when deg(p) + K does not exceed the rule's exactness.
  Vector project_polynomial(const std::function<Real(const Vec3&)>& p) const;

  /// Collision invariants chi_0..chi_4 as coefficient vectors (K >= 2).
  Vector chi(int j) const;

  /// Gram matrix assembled by quadrature (identity up to roundoff).
  Matrix gram_matrix() const;

  /// Matrix of multiplication by (v . omega); omega must be unit.
  Matrix multiplication_matrix(const Vec3& omega) const;
  const Matrix& axis_multiplication(int axis) const { return vmul_[axis]; }

  /// Representation matrix of f(v) -> f(O^T v) on the basis, by quadrature.
  Matrix rotation_matrix(const Mat3& O) const;

 private:
  int degree_ = 0;
  std::vector<MultiIndex> index_map_;
  std::map<MultiIndex, int> position_;
  Quadrature1d quad_;
  Matrix vmul_[3];  // multiplication by v1, v2, v3
};

/// Rank-5 projection onto span{chi_0..chi_4}, its complement, and the
/// rank-1 density projection P_d onto chi_0.
struct ProjectionSet {
  Matrix P0;
  Matrix P1;
  Matrix Pd;
};

ProjectionSet projections(const HermiteBasis& basis);

/// Frequency-weighted metric (f,g)_xi = (f,g) + s^-2 (P_d f, P_d g).
/// In this basis P_d picks the leading (chi_0) coefficient.
struct WeightedMetric {
  Real s;
  int dim;

  Matrix gram() const;
};

WeightedMetric weighted_metric(Real s, const HermiteBasis& basis);

Complex weighted_inner(const CVector& f, const CVector& g, Real s);

/// Bilinear pairing (f, conj g)_xi used by the spectral projectors.
Complex weighted_bilinear(const CVector& f, const CVector& g, Real s);

Real weighted_norm(const CVector& f, Real s);

}  // namespace vpb
