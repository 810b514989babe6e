#pragma once

#include <map>
#include <string>

#include "vpb/hermite.hpp"

namespace vpb {

enum class CollisionModel { bgk, spectral_relaxation, hard_sphere };

std::string to_string(CollisionModel m);

/// Galerkin matrix of the linearized collision operator together with the
/// measured coercivity constant mu (smallest nonzero eigenvalue of -L) and
/// the assembly diagnostics taken before symmetrization / kernel projection.
struct CollisionMatrix {
  Matrix matrix;
  CollisionModel model_tag = CollisionModel::bgk;
  Real nu0 = 0;
  Real mu = 0;
  Real symmetry_defect = 0;  // ||L - L^T||_F / ||L||_F pre-symmetrization
  Vector kernel_defect;      // ||L chi_j|| pre-projection, j = 0..4
};

/// Per-multi-index decay rates of the synthetic diagonal model. The five
/// collision invariants carry no rate (eigenvalue 0); the three isotropic
/// degree-2 indices must share one rate so that chi_4 stays in the kernel.
struct RelaxationSpectrum {
  std::map<MultiIndex, Real> rates;

  /// rate(k) = base + slope * |k| on every non-invariant index up to K.
  static RelaxationSpectrum graded(Real base, Real slope, const HermiteBasis& basis);
};

struct HardSphereQuadrature {
  int nodes_v = 10;    // Gauss-Hermite nodes per velocity axis
  int nodes_theta = 0; // 0 -> K+2 (exact in the angular variable)
  int nodes_phi = 0;   // 0 -> max(8, K+2)
  double max_node_ops = 2e10;  // budget guard on pair x angle work
};

CollisionMatrix assemble_bgk(Real nu0, const HermiteBasis& basis);

CollisionMatrix assemble_spectral_relaxation(const RelaxationSpectrum& spec,
                                             const HermiteBasis& basis);

/// Weak-form Galerkin assembly of the hard-sphere operator with kernel
/// B = |(v - v*) . omega|: deterministic tensor Gauss-Hermite quadrature
/// over (v, v*), an exact product rule on the collision sphere for the
/// gain term, and the closed-form collision frequency for the loss term.
/// The matrix is symmetrized and re-projected so chi_0..chi_4 are exact
/// kernel vectors; pre-fix defects are kept as diagnostics.
CollisionMatrix assemble_hard_sphere(const HermiteBasis& basis,
                                     const HardSphereQuadrature& quad,
                                     int threads = 0);

/// As above but backed by the binary matrix cache in cache_dir
/// (32-byte header {magic, version, K, dims}, row-major little-endian).
CollisionMatrix assemble_hard_sphere_cached(const HermiteBasis& basis,
                                            const HardSphereQuadrature& quad,
                                            const std::string& cache_dir,
                                            int threads = 0);

std::string hard_sphere_cache_name(int K, const HardSphereQuadrature& quad);
bool save_collision_cache(const std::string& path, int K, const Matrix& L);
bool load_collision_cache(const std::string& path, int K, int dims, Matrix& L);

/// nu(v) = 2 pi E|X - v|, X ~ N(0, I3); closed form for the hard-sphere
/// kernel above.
Real hard_sphere_collision_frequency(Real speed);

/// Orthonormal columns spanning range(P1) = N_0-perp within the basis.
struct MicroSpace {
  Matrix U1;  // dim x (dim - 5)

  explicit MicroSpace(const HermiteBasis& basis);
  int dim() const { return static_cast<int>(U1.cols()); }
  Matrix restrict(const Matrix& M) const { return U1.transpose() * M * U1; }
  CVector lift(const CVector& c) const { return U1.cast<Complex>() * c; }
  CVector project_coords(const CVector& f) const { return U1.transpose().cast<Complex>() * f; }
};

/// Solves (L - shift P1) x = rhs on range(P1); shift = 0 solves L x = rhs.
/// rhs must be microscopic within 1e-10; the solve residual is checked.
CVector solve_micro(const CollisionMatrix& L, const MicroSpace& micro,
                    Complex shift, const CVector& rhs);

}  // namespace vpb
