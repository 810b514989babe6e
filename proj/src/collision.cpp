#include "vpb/collision.hpp"

#include <Eigen/Eigenvalues>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vpb/parallel.hpp"

static_assert(std::endian::native == std::endian::little,
              "collision matrix cache assumes a little-endian host");

namespace vpb {

std::string to_string(CollisionModel m) {
  switch (m) {
    case CollisionModel::bgk: return "bgk";
    case CollisionModel::spectral_relaxation: return "spectral_relaxation";
    case CollisionModel::hard_sphere: return "hard_sphere";
  }
  return "?";
}

namespace {

bool is_invariant_index(const MultiIndex& k) {
  int d = k[0] + k[1] + k[2];
  return d == 0 || (d == 1);
}

bool is_isotropic_pair_index(const MultiIndex& k) {
  return (k[0] == 2 && k[1] == 0 && k[2] == 0) ||
         (k[0] == 0 && k[1] == 2 && k[2] == 0) ||
         (k[0] == 0 && k[1] == 0 && k[2] == 2);
}

/// Measured coercivity constant: smallest eigenvalue of -L on range(P1).
Real measure_mu(const Matrix& L, const HermiteBasis& basis) {
  MicroSpace micro(basis);
  Matrix Lr = micro.restrict(L);
  Eigen::SelfAdjointEigenSolver<Matrix> es(-Lr);
  return es.eigenvalues().minCoeff();
}

Vector kernel_defects(const Matrix& L, const HermiteBasis& basis) {
  Vector d(5);
  for (int j = 0; j <= 4; ++j) d[j] = (L * basis.chi(j)).norm();
  return d;
}

}  // namespace

CollisionMatrix assemble_bgk(Real nu0, const HermiteBasis& basis) {
  if (!(nu0 > 0)) throw std::invalid_argument("bgk needs nu0 > 0");
  ProjectionSet ps = projections(basis);
  CollisionMatrix out;
  out.matrix = -nu0 * ps.P1;
  out.model_tag = CollisionModel::bgk;
  out.nu0 = nu0;
  out.mu = nu0;
  out.kernel_defect = kernel_defects(out.matrix, basis);
  return out;
}

RelaxationSpectrum RelaxationSpectrum::graded(Real base, Real slope,
                                              const HermiteBasis& basis) {
  RelaxationSpectrum spec;
  for (const MultiIndex& k : basis.index_map()) {
    if (is_invariant_index(k)) continue;
    int d = k[0] + k[1] + k[2];
    spec.rates[k] = base + slope * d;
  }
  return spec;
}

CollisionMatrix assemble_spectral_relaxation(const RelaxationSpectrum& spec,
                                             const HermiteBasis& basis) {
  if (basis.degree() < 2) {
    throw std::invalid_argument("spectral relaxation needs basis degree >= 2");
  }
  int dim = basis.dimension();
  Matrix L = Matrix::Zero(dim, dim);
  Real iso_rate = -1;
  Real min_rate = std::numeric_limits<Real>::infinity();
  for (const MultiIndex& k : basis.index_map()) {
    if (is_invariant_index(k)) {
      if (spec.rates.count(k)) {
        throw std::invalid_argument("relaxation spectrum assigns a rate to a collision invariant");
      }
      continue;
    }
    auto it = spec.rates.find(k);
    if (it == spec.rates.end()) {
      std::ostringstream msg;
      msg << "relaxation spectrum misses rate for index (" << k[0] << "," << k[1]
          << "," << k[2] << ")";
      throw std::invalid_argument(msg.str());
    }
    Real rate = it->second;
    if (!(rate > 0)) throw std::invalid_argument("relaxation rates must be positive");
    if (is_isotropic_pair_index(k)) {
      if (iso_rate < 0) {
        iso_rate = rate;
      } else if (std::abs(rate - iso_rate) > 1e-14 * iso_rate) {
        throw std::invalid_argument(
            "the three isotropic degree-2 indices must share one rate (chi_4 kernel)");
      }
    }
    L(basis.index_of(k), basis.index_of(k)) = -rate;
  }
  // Restore the chi_4 direction inside the isotropic degree-2 sector.
  Vector c4 = basis.chi(4);
  L += iso_rate * (c4 * c4.transpose());

  CollisionMatrix out;
  out.matrix = L;
  out.model_tag = CollisionModel::spectral_relaxation;
  for (const auto& [k, rate] : spec.rates) min_rate = std::min(min_rate, rate);
  out.nu0 = min_rate;
  out.kernel_defect = kernel_defects(out.matrix, basis);
  out.mu = measure_mu(out.matrix, basis);
  return out;
}

Real hard_sphere_collision_frequency(Real speed) {
  Real r = std::abs(speed);
  constexpr Real kSqrt2OverPi = 0.7978845608028654;
  if (r < 1e-4) {
    return 2.0 * M_PI * kSqrt2OverPi * (2.0 + r * r / 3.0);
  }
  Real mean = kSqrt2OverPi * std::exp(-0.5 * r * r) +
              (r + 1.0 / r) * std::erf(r / std::sqrt(2.0));
  return 2.0 * M_PI * mean;
}

namespace {

struct PairAccumulator {
  Matrix gain_loss;  // running sum of pair contributions
};

/// Evaluates the polynomial parts of all basis functions at a point using
/// precomputed per-index component arrays (hot path of the assembly).
struct FastEval {
  int K;
  int dim;
  std::vector<int> k1, k2, k3;

  explicit FastEval(const HermiteBasis& basis)
      : K(basis.degree()), dim(basis.dimension()) {
    for (const MultiIndex& k : basis.index_map()) {
      k1.push_back(k[0]);
      k2.push_back(k[1]);
      k3.push_back(k[2]);
    }
  }

  void axis_values(Real x, Real* out) const {
    out[0] = 1.0;
    if (K >= 1) out[1] = x;
    for (int k = 1; k < K; ++k) {
      out[k + 1] = (x * out[k] - std::sqrt(static_cast<Real>(k)) * out[k - 1]) /
                   std::sqrt(static_cast<Real>(k + 1));
    }
  }

  void operator()(const Vec3& v, Real* values) const {
    Real hx[HermiteBasis::kDegreeCap + 1];
    Real hy[HermiteBasis::kDegreeCap + 1];
    Real hz[HermiteBasis::kDegreeCap + 1];
    axis_values(v[0], hx);
    axis_values(v[1], hy);
    axis_values(v[2], hz);
    for (int a = 0; a < dim; ++a) values[a] = hx[k1[a]] * hy[k2[a]] * hz[k3[a]];
  }
};

}  // namespace

CollisionMatrix assemble_hard_sphere(const HermiteBasis& basis,
                                     const HardSphereQuadrature& quad,
                                     int threads) {
  if (basis.degree() < 2) throw std::invalid_argument("hard sphere needs basis degree >= 2");
  const int K = basis.degree();
  const int dim = basis.dimension();
  const int nv = quad.nodes_v;
  const int mt = quad.nodes_theta > 0 ? quad.nodes_theta : K + 2;
  const int mp = quad.nodes_phi > 0 ? quad.nodes_phi : std::max(8, K + 2);
  if (nv < 4) throw std::invalid_argument("hard sphere quadrature needs >= 4 velocity nodes");

  // 3-D Gauss-Hermite grid with tail nodes of negligible weight dropped.
  Quadrature1d q1 = gauss_hermite_prob(nv);
  std::vector<Vec3> nodes;
  std::vector<Real> weights;
  Real wmax3 = std::pow(q1.weights.maxCoeff(), 3);
  for (int i = 0; i < nv; ++i) {
    for (int j = 0; j < nv; ++j) {
      for (int k = 0; k < nv; ++k) {
        Real w = q1.weights[i] * q1.weights[j] * q1.weights[k];
        if (w < 1e-18 * wmax3) continue;
        nodes.emplace_back(q1.nodes[i], q1.nodes[j], q1.nodes[k]);
        weights.push_back(w);
      }
    }
  }
  const int n3 = static_cast<int>(nodes.size());

  double node_ops = 0.5 * double(n3) * double(n3) * double(mt) * double(mp);
  if (node_ops > quad.max_node_ops) {
    std::ostringstream msg;
    msg << "hard-sphere quadrature budget exceeded: ~" << node_ops
        << " node-angle evaluations requested, cap is " << quad.max_node_ops;
    throw numerical_error(msg.str());
  }

  // Gauss-Legendre in t = cos(theta) on [0,1] and a uniform phi rule; both
  // exact for the polynomial angular dependence of the gain term.
  Quadrature1d gl;
  {
    // Legendre via Golub-Welsch on [-1,1], then mapped to [0,1].
    Matrix J = Matrix::Zero(mt, mt);
    for (int k = 1; k < mt; ++k) {
      Real b = k / std::sqrt(4.0 * k * k - 1.0);
      J(k, k - 1) = J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(J);
    gl.nodes.resize(mt);
    gl.weights.resize(mt);
    for (int i = 0; i < mt; ++i) {
      gl.nodes[i] = 0.5 * (es.eigenvalues()[i] + 1.0);
      Real v0 = es.eigenvectors()(0, i);
      gl.weights[i] = v0 * v0;  // normalized to interval length 1
    }
  }

  FastEval eval(basis);
  std::vector<Vector> hvals(n3);
  for (int p = 0; p < n3; ++p) {
    hvals[p].resize(dim);
    eval(nodes[p], hvals[p].data());
  }

  const int nthreads = std::min(resolve_threads(threads), n3);
  std::vector<Matrix> partial(nthreads, Matrix::Zero(dim, dim));

  parallel_for(n3, nthreads, [&](int p) {
    // Matches parallel_for's round-robin schedule, so each slot has a
    // single writer and the reduction order is fixed.
    int slot = p % nthreads;
    Matrix& acc = partial[slot];
    Vector g(dim);
    std::vector<Real> hprime(dim), hstar(dim);
    for (int q = p + 1; q < n3; ++q) {
      const Vec3 u = nodes[p] - nodes[q];
      const Real unorm = u.norm();
      if (unorm < 1e-14) continue;
      const Real wpair = weights[p] * weights[q];
      const Vec3 uhat = u / unorm;
      // orthonormal frame transverse to uhat
      Vec3 e1f = uhat.unitOrthogonal();
      Vec3 e2f = uhat.cross(e1f);

      g.setZero();
      for (int kt = 0; kt < mt; ++kt) {
        const Real t = gl.nodes[kt];
        const Real c = unorm * t;  // B = |u . omega| on the hemisphere
        const Real st = std::sqrt(std::max(0.0, 1.0 - t * t));
        const Real wt = 2.0 * gl.weights[kt] * (2.0 * M_PI / mp) * c;
        for (int lp = 0; lp < mp; ++lp) {
          const Real phi = 2.0 * M_PI * lp / mp;
          const Vec3 omega = t * uhat + st * (std::cos(phi) * e1f + std::sin(phi) * e2f);
          const Vec3 vp = nodes[p] - c * omega;
          const Vec3 vq = nodes[q] + c * omega;
          eval(vp, hprime.data());
          eval(vq, hstar.data());
          for (int a = 0; a < dim; ++a) g[a] += wt * (hprime[a] + hstar[a]);
        }
      }
      const Real loss2 = 2.0 * M_PI * unorm;
      acc.noalias() += wpair * hvals[p] * (g - loss2 * hvals[q]).transpose();
      acc.noalias() += wpair * hvals[q] * (g - loss2 * hvals[p]).transpose();
    }
    // diagonal collision-frequency part, distributed over the same loop
    acc.noalias() -= (weights[p] * hard_sphere_collision_frequency(nodes[p].norm())) *
                     hvals[p] * hvals[p].transpose();
  });

  Matrix L = Matrix::Zero(dim, dim);
  for (const Matrix& m : partial) L += m;

  CollisionMatrix out;
  out.model_tag = CollisionModel::hard_sphere;
  out.symmetry_defect = (L - L.transpose()).norm() / L.norm();
  L = 0.5 * (L + L.transpose()).eval();
  out.kernel_defect = kernel_defects(L, basis);

  // exact kernel re-projection; keeps symmetry
  ProjectionSet ps = projections(basis);
  L = (ps.P1 * L * ps.P1).eval();
  L = 0.5 * (L + L.transpose()).eval();
  out.matrix = L;
  out.nu0 = hard_sphere_collision_frequency(0.0);
  out.mu = measure_mu(L, basis);
  if (!(out.mu > 0)) {
    throw numerical_error("hard-sphere quadrature too coarse: coercivity lost");
  }
  return out;
}

std::string hard_sphere_cache_name(int K, const HardSphereQuadrature& quad) {
  std::ostringstream name;
  int mt = quad.nodes_theta > 0 ? quad.nodes_theta : K + 2;
  int mp = quad.nodes_phi > 0 ? quad.nodes_phi : std::max(8, K + 2);
  name << "hs_K" << K << "_nv" << quad.nodes_v << "_nt" << mt << "_np" << mp << ".bin";
  return name.str();
}

namespace {

struct CacheHeader {
  char magic[8];
  std::uint32_t version;
  std::uint32_t K;
  std::uint32_t dims;
  std::uint32_t reserved[3];
};
static_assert(sizeof(CacheHeader) == 32);

constexpr char kMagic[8] = {'V', 'P', 'B', 'H', 'S', 'C', '0', '1'};
constexpr std::uint32_t kCacheVersion = 1;

}  // namespace

bool save_collision_cache(const std::string& path, int K, const Matrix& L) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  CacheHeader h{};
  std::memcpy(h.magic, kMagic, 8);
  h.version = kCacheVersion;
  h.K = static_cast<std::uint32_t>(K);
  h.dims = static_cast<std::uint32_t>(L.rows());
  out.write(reinterpret_cast<const char*>(&h), sizeof(h));
  // row-major 64-bit floats
  for (int i = 0; i < L.rows(); ++i) {
    out.write(reinterpret_cast<const char*>(L.row(i).eval().data()),
              static_cast<std::streamsize>(sizeof(double)) * L.cols());
  }
  return bool(out);
}

bool load_collision_cache(const std::string& path, int K, int dims, Matrix& L) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  CacheHeader h{};
  in.read(reinterpret_cast<char*>(&h), sizeof(h));
  if (!in || std::memcmp(h.magic, kMagic, 8) != 0 || h.version != kCacheVersion ||
      h.K != static_cast<std::uint32_t>(K) || h.dims != static_cast<std::uint32_t>(dims)) {
    return false;
  }
  L.resize(dims, dims);
  Vector row(dims);
  for (int i = 0; i < dims; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(sizeof(double)) * dims);
    L.row(i) = row;
  }
  return bool(in);
}

CollisionMatrix assemble_hard_sphere_cached(const HermiteBasis& basis,
                                            const HardSphereQuadrature& quad,
                                            const std::string& cache_dir,
                                            int threads) {
  namespace fs = std::filesystem;
  fs::create_directories(cache_dir);
  std::string path =
      (fs::path(cache_dir) / hard_sphere_cache_name(basis.degree(), quad)).string();
  Matrix L;
  if (load_collision_cache(path, basis.degree(), basis.dimension(), L)) {
    CollisionMatrix out;
    out.matrix = L;
    out.model_tag = CollisionModel::hard_sphere;
    out.nu0 = hard_sphere_collision_frequency(0.0);
    out.kernel_defect = kernel_defects(L, basis);
    out.symmetry_defect = (L - L.transpose()).norm() / L.norm();
    out.mu = measure_mu(L, basis);
    return out;
  }
  CollisionMatrix fresh = assemble_hard_sphere(basis, quad, threads);
  save_collision_cache(path, basis.degree(), fresh.matrix);
  return fresh;
}

MicroSpace::MicroSpace(const HermiteBasis& basis) {
  if (basis.degree() < 2) throw std::invalid_argument("micro space needs basis degree >= 2");
  int dim = basis.dimension();
  U1 = Matrix::Zero(dim, dim - 5);
  int col = 0;
  bool iso_done = false;
  for (int a = 0; a < dim; ++a) {
    const MultiIndex& k = basis.index_map()[a];
    if (is_invariant_index(k)) continue;
    if (is_isotropic_pair_index(k)) {
      if (iso_done) continue;
      // two orthonormal directions inside span{(2,0,0),(0,2,0),(0,0,2)}
      // orthogonal to chi_4
      int a200 = basis.index_of({2, 0, 0});
      int a020 = basis.index_of({0, 2, 0});
      int a002 = basis.index_of({0, 0, 2});
      U1(a002, col) = 1.0 / std::sqrt(2.0);
      U1(a020, col) = -1.0 / std::sqrt(2.0);
      ++col;
      U1(a002, col) = 1.0 / std::sqrt(6.0);
      U1(a020, col) = 1.0 / std::sqrt(6.0);
      U1(a200, col) = -2.0 / std::sqrt(6.0);
      ++col;
      iso_done = true;
      continue;
    }
    U1(a, col++) = 1.0;
  }
  if (col != dim - 5) throw std::logic_error("micro space construction miscounted");
}

CVector solve_micro(const CollisionMatrix& L, const MicroSpace& micro,
                    Complex shift, const CVector& rhs) {
  // macroscopic leakage check
  CVector micro_part = micro.lift(micro.project_coords(rhs));
  Real leak = (rhs - micro_part).norm();
  if (leak > 1e-10 * (1.0 + rhs.norm())) {
    throw std::invalid_argument("solve_micro: rhs has a macroscopic component");
  }
  CMatrix A = micro.restrict(L.matrix).cast<Complex>();
  A.diagonal().array() -= shift;
  CVector rr = micro.project_coords(rhs);
  CVector c = A.partialPivLu().solve(rr);
  Real resid = (A * c - rr).norm();
  if (resid > 1e-10 * (1.0 + rr.norm())) {
    throw numerical_error("solve_micro: solve residual too large (ill-conditioned shift)");
  }
  return micro.lift(c);
}

}  // namespace vpb
