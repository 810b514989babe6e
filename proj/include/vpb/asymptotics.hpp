#pragma once

#include <array>
#include <map>
#include <vector>

#include "vpb/dispersion.hpp"

namespace vpb {

/// Second-order expansion constants of the five VPB branches:
///   lambda_{+-1}(s) = +-i + (-a1 +- i b1) s^2 + o(s^2)
///   lambda_0(s)     = -a0 s^2 + o(s^2)
///   lambda_{2,3}(s) = -a2 s^2 + o(s^2)
struct CoefficientSet {
  Real a0 = 0, a1 = 0, a2 = 0, b1 = 0;
  std::map<int, Complex> lambda_second;  // j -> lambda_j''(0)
};

CoefficientSet vpb_coefficients(const CollisionMatrix& L, const HermiteBasis& basis);

struct BoltzmannCoefficientSet {
  Real a_pm1 = 0, a0 = 0, a2 = 0;
};

BoltzmannCoefficientSet boltzmann_coefficients(const CollisionMatrix& L,
                                               const HermiteBasis& basis);

/// lambda_j''(0) through the determinant-derivative route
/// (the (L -+ i P1)^{-1} moment plus (5/3) i), independent of the
/// sesquilinear-form route inside vpb_coefficients.
Complex lambda_second_alt(const CollisionMatrix& L, const HermiteBasis& basis, int j);

/// Second difference of branch data at s in {h, 2h}, slope-aware and
/// Richardson-extrapolated; even_in_s selects the parity of the error model.
Complex lambda_second_fd(Complex lambda_h, Complex lambda_2h, Real h,
                         Complex intercept, Complex slope, bool even_in_s);

struct ExpansionRow {
  Real s = 0;
  Real remainder = 0;  // |lambda(s) - intercept - slope s - half_second s^2|
  Real ratio = 0;      // remainder / s^2
};

struct ExpansionReport {
  int j = 0;
  Complex intercept;
  Complex slope;
  Complex half_second;
  std::vector<ExpansionRow> rows;  // ordered by decreasing s
  bool ratio_monotone = false;     // ratio decreases as s decreases
  Real decay_power = 0;            // fitted extra power of s in the ratio
};

/// Remainder audit of a continued branch against its second-order model.
/// The slope term is nonzero only for the Boltzmann acoustic pair.
ExpansionReport validate_expansion(const Branch& branch, Complex intercept,
                                   Complex slope, Complex lambda_second);

/// Closed-form eigenvectors of the 5x5 acoustic (linearized Euler-Poisson)
/// operator A(xi), orthonormal in the weighted 5-vector product
/// (U,V)_xi = (U,V) + s^-2 U^0 conj(V^0). Order: j = -1, 0, 1, 2, 3.
std::array<CVector5, 5> euler_poisson_eigenvectors(Real s, const Vec3& omega);

Complex weighted_inner5(const CVector5& u, const CVector5& v, Real s);

struct LeadingTermRow {
  Real s = 0;
  Real overlap = 0;        // <psi_j(s), psi_j0> / ||psi_j0||^2, should -> 1
  Real first_order = 0;    // ||psi_j(s) - psi_j0 - s psi_j1|| / s^2
  Complex chi0_coeff;      // <psi_j(s), chi_0> (drives the psi_{0,2} check)
};

/// Projects branch eigenfunctions onto the paper-table leading terms.
std::vector<LeadingTermRow> eigenfunction_leading_terms(const Branch& branch,
                                                        const CollisionMatrix& L,
                                                        const HermiteBasis& basis);

/// Quadratic fit of chi_0-coefficients against s^2; for the j = 0 branch
/// the limit is (psi_{0,2}, sqrt M) = -sqrt(2/3).
Real fit_quadratic_coefficient(const std::vector<LeadingTermRow>& rows);

/// Branch continuation on an adaptively sized geometric grid: the top end
/// is 1.5x the frequency where the fastest-decaying branch is expected to
/// meet Re = -mu/2, so the empirical radius r0 falls inside the grid.
BranchFamily probe_branch_family(const CollisionMatrix& L, const HermiteBasis& basis,
                                 Real s_min = 1e-3, int n = 40,
                                 bool eigenfunctions = false);

}  // namespace vpb
