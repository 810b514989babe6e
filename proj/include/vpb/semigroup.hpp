#pragma once

#include <map>
#include <optional>
#include <vector>

#include "vpb/asymptotics.hpp"
#include "vpb/dispersion.hpp"

namespace vpb {

/// Scaling-and-squaring Pade approximation of e^A.
CMatrix matrix_exponential(const CMatrix& A);

/// Propagates one Fourier mode under a dense complex generator by
/// eigendecomposition, falling back to the scaled-squared exponential when
/// the eigenvector conditioning estimate exceeds 1e8.
class ModePropagator {
 public:
  explicit ModePropagator(CMatrix generator, Real s = 0);

  CVector apply(const CVector& f0, Real t) const;
  /// spectral coefficients V^{-1} f0 for repeated propagation
  CVector coefficients(const CVector& f0) const;
  CVector apply_coefficients(const CVector& coeffs, Real t) const;

  Real s() const { return s_; }
  Real condition() const { return cond_; }
  Real reconstruction_error() const { return recon_err_; }
  bool uses_expm() const { return use_expm_; }
  const CMatrix& generator() const { return A_; }
  const CVector& eigenvalues() const { return evals_; }

 private:
  CMatrix A_;
  Real s_;
  CMatrix V_, Vinv_;
  CVector evals_;
  Real cond_ = 0;
  Real recon_err_ = 0;
  bool use_expm_ = false;
};

/// Low-frequency split S = S1 + S2 of Theorem-3.4 type: S1 collects the
/// five branch eigenprojections (only active for s <= r0), S2 is the
/// remainder S - S1.
struct SplitPropagator {
  ModePropagator prop;
  Real s = 0;
  bool active = false;         // s <= r0
  Real weight = 0;             // kappa/s^2 term of the bilinear pairing
  std::vector<Complex> lambda; // branch eigenvalues, j = -1..3
  std::vector<CVector> psi;    // branch eigenfunctions

  CVector S1(const CVector& f0, Real t) const;
  CVector S2(const CVector& f0, Real t) const;
  /// max over j,k of |(psi_j, conj psi_k)_xi - delta_jk|
  Real projector_defect() const;
};

/// Builds the split at frequency s by continuing the branches up to s
/// (inactive S1 when s > r0 or the continuation does not reach s).
SplitPropagator make_split_propagator(const CollisionMatrix& L,
                                      const HermiteBasis& basis, Real s, Real r0,
                                      SymbolVariant variant = SymbolVariant::vpb,
                                      Real eps = 1.0);

/// Macroscopic moments (f, chi_j) of a coefficient vector.
struct MomentTriple {
  Complex density;
  Eigen::Vector3cd momentum;
  Complex energy;
};

MomentTriple moments_of(const CVector& f, const HermiteBasis& basis);

/// Leading (non-remainder) terms of the S1 moments at omega = e1:
/// the displayed parts of the macroscopic density/momentum/energy of
/// S1(t) f0 in terms of the initial moments.
MomentTriple s1_leading_moments(const std::map<int, Complex>& lambda, Complex n0,
                                const Eigen::Vector3cd& m0, Complex q0, Real s,
                                Real t);

enum class FamilyTag { density_energy, zero_mean_momentum_energy };

std::string to_string(FamilyTag tag);

/// Radial initial-data families (Fourier profiles of the Remark-4.3 type
/// Gaussians), reduced to the omega = e1 frame.
struct InitialDataFamily {
  FamilyTag tag = FamilyTag::density_energy;
  Real d0 = 1.0;
  Real d1 = 1.0;
  Real r0 = 0.5;

  CVector mode(const HermiteBasis& basis, Real s) const;
};

enum class Observable { density, momentum, energy, efield, micro, hp_norm };

std::string to_string(Observable obs);

struct RadialQuadrature {
  std::vector<Real> s;
  std::vector<Real> w;  // trapezoid weights in log s, folded with ds

  static RadialQuadrature log_grid(Real s_min, Real s_max, int n);
};

struct NormSeries {
  std::vector<Real> t;
  std::vector<Real> value;  // physical-space norm (not squared)
};

struct DecayHarnessOptions {
  SymbolVariant variant = SymbolVariant::vpb;
  Real eps = 1.0;
  int alpha = 0;  // spatial-derivative weight |xi|^alpha in the integrand
  int threads = 0;
  bool convergence_check = true;
  Real convergence_tol = 1e-3;  // doubling the resolution moves norms < 0.1%
};

struct DecayHarnessResult {
  std::map<Observable, NormSeries> series;
  bool quadrature_converged = true;
  Real max_rel_change = 0;
};

/// Physical-space norms by radial shell quadrature 4 pi s^2 ds of the
/// per-mode observable amplitudes; one propagator eigensolve per grid
/// point, shared across the supplied families.
std::vector<DecayHarnessResult> assemble_physical_norms(
    const std::vector<InitialDataFamily>& families, const CollisionMatrix& L,
    const HermiteBasis& basis, const std::vector<Real>& times,
    const RadialQuadrature& quad, const DecayHarnessOptions& opts = {});

DecayHarnessResult assemble_physical_norms(const InitialDataFamily& family,
                                           const CollisionMatrix& L,
                                           const HermiteBasis& basis,
                                           const std::vector<Real>& times,
                                           const RadialQuadrature& quad,
                                           const DecayHarnessOptions& opts = {});

struct DecayFit {
  Observable obs = Observable::density;
  Real exponent = 0;
  Real stderr_ = 0;
  Real residual = 0;  // RMS of log-log fit residuals
  Real t1 = 0, t2 = 0;
  int n_points = 0;
  bool oscillation_flag = false;
};

/// Least-squares slope of log(norm) against log(1+t) on [t1, t2].
DecayFit fit_exponent(const NormSeries& series, Real t1, Real t2,
                      Real residual_threshold = 0.5);

/// Logarithmically spaced time grid.
std::vector<Real> time_grid(Real t_min, Real t_max, int n);

/// 5x5 Fourier symbol of the linearized Navier-Stokes-Poisson system in
/// (n, m, theta) with viscosity eta and heat coefficient alpha taken from
/// the same collision operator (eta = a2, alpha = a0).
struct NspSymbol {
  Real s = 0;
  CMatrix5 matrix;
  Real eta = 0;
  Real alpha_heat = 0;
};

NspSymbol assemble_nsp(Real eta, Real alpha_heat, Real s);

enum class NspFamily { gaussian_density_temperature, zero_density };

struct NspDecayResult {
  NormSeries n, m, theta;
  bool quadrature_converged = true;
  Real max_rel_change = 0;
};

NspDecayResult nsp_decay(Real eta, Real alpha_heat, NspFamily family,
                         const std::vector<Real>& times,
                         const RadialQuadrature& quad, int threads = 0,
                         bool convergence_check = true);

}  // namespace vpb
