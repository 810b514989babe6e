#pragma once

#include <array>
#include <string>
#include <vector>

#include "vpb/symbols.hpp"

namespace vpb {

/// Resolvent moments a_ij(lambda, s) = (R(lambda, s e1) P1(v1 chi_i), v1 chi_j)
/// entering the reduced dispersion system, plus the shear entry a22.
struct TransportEntries {
  Complex a11, a14, a41, a44, a22;
};

TransportEntries transport_entries(const ResolventWorkspace& ws, Complex lambda,
                                   Real s);

/// Strength of the Poisson coupling in the reduced system: 1/eps^2 for the
/// VPB symbol, 0 for the plain Boltzmann symbol.
Real poisson_coupling(SymbolVariant variant, Real eps);

/// 3x3 reduced matrix M(lambda, s) in the unknowns (W0, W.omega, W4).
Eigen::Matrix3cd dispersion_matrix(Complex lambda, Real s,
                                   const TransportEntries& e, Real kappa);

/// det M via the expanded polynomial form; regular at s = 0 where it
/// degenerates to lambda (lambda^2 + kappa).
Complex det_D(const ResolventWorkspace& ws, Complex lambda, Real s, Real kappa);

/// det M evaluated literally from the 3x3 matrix (s != 0 only).
Complex det_D_via_matrix(const ResolventWorkspace& ws, Complex lambda, Real s,
                         Real kappa);

/// Shear dispersion function D0(lambda, s) = lambda - s^2 a22.
Complex det_D0(const ResolventWorkspace& ws, Complex lambda, Real s);

struct BranchSample {
  Real s = 0;
  Complex lambda;
  Real root_residual = 0;  // |D| or |D0| at the accepted root
  CVector psi;             // eigenfunction coefficients (may be empty)
  Real eig_residual = 0;   // ||B psi - lambda psi|| when psi was built
};

struct Branch {
  int j = 0;  // -1, 0, 1 (D roots), 2, 3 (shared D0 root)
  std::vector<BranchSample> samples;
  bool truncated = false;
  std::string diagnostic;

  const BranchSample* at(Real s, Real rel_tol = 1e-9) const;
};

struct BranchFamily {
  std::array<Branch, 5> branches;  // order j = -1, 0, 1, 2, 3
  Real r0 = 0;                     // empirical branch-validity radius

  const Branch& branch(int j) const { return branches[static_cast<size_t>(j + 1)]; }
  Branch& branch(int j) { return branches[static_cast<size_t>(j + 1)]; }
};

struct BranchOptions {
  Real eps = 1.0;
  SymbolVariant variant = SymbolVariant::vpb;
  bool build_eigenfunctions = true;
  Real residual_tol = 1e-12;
  int max_iterations = 60;
};

/// Newton continuation of the five eigenvalue branches over an increasing
/// s-grid, seeded at the analytic intercepts. A branch is truncated when
/// the corrector diverges, the correction exceeds a tenth of the branch
/// separation, or the root leaves the half-plane Re > -mu/2; r0 is the
/// largest s at which all five survive.
BranchFamily continue_branches(const CollisionMatrix& L, const HermiteBasis& basis,
                               const std::vector<Real>& s_grid,
                               const BranchOptions& opts = {});

Branch continue_branch(const CollisionMatrix& L, const HermiteBasis& basis, int j,
                       const std::vector<Real>& s_grid, Real eps = 1.0);

/// Eigenfunction of B(s e1) (or E(s e1)) at a verified branch root: null
/// vector of M for the longitudinal branches, the explicit shear formula
/// for j = 2, 3; normalized so (psi, conj psi)_xi = 1 with the dominant
/// macroscopic coefficient real positive.
CVector build_eigenfunction(const ResolventWorkspace& ws, int j, Real s,
                            Complex lambda, Real kappa);

/// Geometric grid from s_min to s_max (inclusive), n points.
std::vector<Real> geometric_grid(Real s_min, Real s_max, int n);

}  // namespace vpb
