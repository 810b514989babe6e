#pragma once

#include <string>
#include <vector>

#include "vpb/collision.hpp"

namespace vpb {

enum class SymbolVariant { vpb, boltzmann };

std::string to_string(SymbolVariant v);

/// Dense Fourier-space generator at frequency xi = s * omega:
///   vpb:       B(xi) = L - i s V_w - (i/(eps^2 s)) V_w P_d
///   boltzmann: E(xi) = L - i s V_w
struct SymbolMatrix {
  CMatrix matrix;
  Real s = 0;
  Vec3 omega = Vec3(1, 0, 0);
  SymbolVariant variant = SymbolVariant::vpb;
  Real eps = 1.0;
};

SymbolMatrix assemble_B(const CollisionMatrix& L, const HermiteBasis& basis,
                        Real s, const Vec3& omega, Real eps = 1.0);

SymbolMatrix assemble_E(const CollisionMatrix& L, const HermiteBasis& basis,
                        Real s, const Vec3& omega);

/// 5x5 acoustic operator A(xi) on N_0 in the basis (chi_0, chi_1..3, chi_4).
struct AcousticMatrix {
  Real s = 0;
  CMatrix5 matrix;
};

AcousticMatrix assemble_A(Real s);
CMatrix5 acoustic_matrix(Real s, const Vec3& omega, Real eps = 1.0);

/// Micro-space data shared by all resolvent work for one collision model:
/// restrictions of L and of v1-multiplication to range(P1) plus the
/// moment vectors v1 chi_j entering the reduced dispersion system.
class ResolventWorkspace {
 public:
  ResolventWorkspace(const CollisionMatrix& L, const HermiteBasis& basis);

  const HermiteBasis& basis() const { return *basis_; }
  const MicroSpace& micro() const { return micro_; }
  Real mu() const { return mu_; }
  const Matrix& Lr() const { return Lr_; }
  const Matrix& Vr() const { return Vr_; }
  /// micro coordinates of P1(v1 chi_j), j in {1, 2, 3, 4}
  const Vector& moment_rhs(int j) const;
  /// full-dimension vector v1 chi_j
  const Vector& moment_vector(int j) const;

  /// LU of (Lr - lambda I - i s Vr); throws numerical_error when the solve
  /// residual indicates a near-singular shift.
  CMatrix reduced_operator(Complex lambda, Real s) const;

 private:
  const HermiteBasis* basis_;
  MicroSpace micro_;
  Matrix Lr_, Vr_;
  Vector w1_, w2_, w3_, w4_;
  Vector r1_, r2_, r3_, r4_;
  Real mu_;
};

/// R(lambda, s e1) rhs: solves [L - lambda P1 - i s P1 V1 P1] x = rhs on
/// range(P1); Re(lambda) > -mu required, residual checked.
CVector resolvent_R(const ResolventWorkspace& ws, Complex lambda, Real s,
                    const CVector& rhs);

struct GapScanPoint {
  Real s = 0;
  Real max_re_all = 0;     // over the whole computed spectrum
  Real max_re_window = 0;  // over eigenvalues with Re > window_floor
  int count_window = 0;
  bool ok = false;
  std::string error;
};

/// Dense eigensolve of B(s e1) per grid point; failures are recorded and
/// the scan continues.
std::vector<GapScanPoint> spectral_gap_scan(const CollisionMatrix& L,
                                            const HermiteBasis& basis,
                                            const std::vector<Real>& s_grid,
                                            Real eps, Real window_floor,
                                            int threads = 0);

struct EigenMode {
  Complex lambda;
  CVector vec;
};

/// Eigenpairs of a symbol matrix with Re(lambda) above the threshold,
/// sorted by descending imaginary part.
std::vector<EigenMode> rightmost_modes(const SymbolMatrix& sym, Real re_threshold);

}  // namespace vpb
