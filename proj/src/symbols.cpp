#include "vpb/symbols.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "vpb/parallel.hpp"

namespace vpb {

std::string to_string(SymbolVariant v) {
  return v == SymbolVariant::vpb ? "vpb" : "boltzmann";
}

SymbolMatrix assemble_B(const CollisionMatrix& L, const HermiteBasis& basis,
                        Real s, const Vec3& omega, Real eps) {
  if (!(s > 0)) throw std::invalid_argument("B(xi) is singular at xi = 0");
  if (!(eps > 0)) throw std::invalid_argument("assemble_B needs eps > 0");
  Matrix V = basis.multiplication_matrix(omega);
  SymbolMatrix out;
  out.matrix = L.matrix.cast<Complex>() - kImag * s * V.cast<Complex>();
  // Poisson coupling (i/(eps^2 s)) V P_d: rank one through chi_0.
  out.matrix.col(0) -= (kImag / (eps * eps * s)) * V.col(0).cast<Complex>();
  out.s = s;
  out.omega = omega;
  out.variant = SymbolVariant::vpb;
  out.eps = eps;
  return out;
}

SymbolMatrix assemble_E(const CollisionMatrix& L, const HermiteBasis& basis,
                        Real s, const Vec3& omega) {
  if (s < 0) throw std::invalid_argument("assemble_E needs s >= 0");
  SymbolMatrix out;
  out.matrix = L.matrix.cast<Complex>();
  if (s > 0) {
    out.matrix -= kImag * s * basis.multiplication_matrix(omega).cast<Complex>();
  }
  out.s = s;
  out.omega = omega;
  out.variant = SymbolVariant::boltzmann;
  out.eps = 1.0;
  return out;
}

CMatrix5 acoustic_matrix(Real s, const Vec3& omega, Real eps) {
  if (!(s > 0)) throw std::invalid_argument("acoustic matrix needs s > 0");
  CMatrix5 A = CMatrix5::Zero();
  const Real c = std::sqrt(2.0 / 3.0);
  for (int i = 0; i < 3; ++i) {
    A(0, 1 + i) = -kImag * s * omega[i];
    A(1 + i, 0) = -kImag * s * (1.0 + 1.0 / (eps * eps * s * s)) * omega[i];
    A(1 + i, 4) = -kImag * c * s * omega[i];
    A(4, 1 + i) = -kImag * c * s * omega[i];
  }
  return A;
}

AcousticMatrix assemble_A(Real s) {
  return AcousticMatrix{s, acoustic_matrix(s, Vec3(1, 0, 0), 1.0)};
}

namespace {

const Vector& pick(const Vector& a, const Vector& b, const Vector& c,
                   const Vector& d, int j) {
  switch (j) {
    case 1: return a;
    case 2: return b;
    case 3: return c;
    case 4: return d;
  }
  throw std::invalid_argument("moment index must be 1..4");
}

}  // namespace

ResolventWorkspace::ResolventWorkspace(const CollisionMatrix& L,
                                       const HermiteBasis& basis)
    : basis_(&basis), micro_(basis) {
  if (basis.degree() < 3) {
    throw std::invalid_argument(
        "resolvent workspace needs basis degree >= 3 (v1 chi_j has degree 3)");
  }
  Lr_ = micro_.restrict(L.matrix);
  Vr_ = micro_.restrict(basis.axis_multiplication(0));
  const Matrix& V1 = basis.axis_multiplication(0);
  w1_ = V1 * basis.chi(1);
  w2_ = V1 * basis.chi(2);
  w3_ = V1 * basis.chi(3);
  w4_ = V1 * basis.chi(4);
  r1_ = micro_.U1.transpose() * w1_;
  r2_ = micro_.U1.transpose() * w2_;
  r3_ = micro_.U1.transpose() * w3_;
  r4_ = micro_.U1.transpose() * w4_;
  mu_ = L.mu;
}

const Vector& ResolventWorkspace::moment_rhs(int j) const {
  return pick(r1_, r2_, r3_, r4_, j);
}

const Vector& ResolventWorkspace::moment_vector(int j) const {
  return pick(w1_, w2_, w3_, w4_, j);
}

CMatrix ResolventWorkspace::reduced_operator(Complex lambda, Real s) const {
  CMatrix A = Lr_.cast<Complex>() - kImag * s * Vr_.cast<Complex>();
  A.diagonal().array() -= lambda;
  return A;
}

CVector resolvent_R(const ResolventWorkspace& ws, Complex lambda, Real s,
                    const CVector& rhs) {
  CVector rr = ws.micro().project_coords(rhs);
  Real leak = (rhs - ws.micro().lift(rr)).norm();
  if (leak > 1e-10 * (1.0 + rhs.norm())) {
    throw std::invalid_argument("resolvent_R: rhs has a macroscopic component");
  }
  CMatrix A = ws.reduced_operator(lambda, s);
  CVector c = A.partialPivLu().solve(rr);
  Real resid = (A * c - rr).norm();
  if (resid > 1e-10 * (1.0 + rr.norm())) {
    throw numerical_error("resolvent_R: conditioning failure near Re(lambda) = -mu");
  }
  return ws.micro().lift(c);
}

std::vector<GapScanPoint> spectral_gap_scan(const CollisionMatrix& L,
                                            const HermiteBasis& basis,
                                            const std::vector<Real>& s_grid,
                                            Real eps, Real window_floor,
                                            int threads) {
  std::vector<GapScanPoint> out(s_grid.size());
  parallel_for(static_cast<int>(s_grid.size()), threads, [&](int i) {
    GapScanPoint& p = out[i];
    p.s = s_grid[i];
    try {
      SymbolMatrix sym = assemble_B(L, basis, p.s, Vec3(1, 0, 0), eps);
      Eigen::ComplexEigenSolver<CMatrix> es(sym.matrix, false);
      if (es.info() != Eigen::Success) {
        p.error = "eigensolver did not converge";
        return;
      }
      p.max_re_all = -std::numeric_limits<Real>::infinity();
      p.max_re_window = -std::numeric_limits<Real>::infinity();
      for (int k = 0; k < es.eigenvalues().size(); ++k) {
        Real re = std::real(es.eigenvalues()[k]);
        p.max_re_all = std::max(p.max_re_all, re);
        if (re > window_floor) {
          p.max_re_window = std::max(p.max_re_window, re);
          ++p.count_window;
        }
      }
      p.ok = true;
    } catch (const std::exception& e) {
      p.error = e.what();
    }
  });
  return out;
}

std::vector<EigenMode> rightmost_modes(const SymbolMatrix& sym, Real re_threshold) {
  Eigen::ComplexEigenSolver<CMatrix> es(sym.matrix, true);
  if (es.info() != Eigen::Success) {
    throw numerical_error("rightmost_modes: eigensolver did not converge");
  }
  std::vector<EigenMode> modes;
  for (int k = 0; k < es.eigenvalues().size(); ++k) {
    if (std::real(es.eigenvalues()[k]) > re_threshold) {
      modes.push_back({es.eigenvalues()[k], es.eigenvectors().col(k)});
    }
  }
  std::sort(modes.begin(), modes.end(), [](const EigenMode& a, const EigenMode& b) {
    return std::imag(a.lambda) > std::imag(b.lambda);
  });
  return modes;
}

}  // namespace vpb
