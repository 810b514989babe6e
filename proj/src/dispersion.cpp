#include "vpb/dispersion.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace vpb {

namespace {

constexpr Real kSqrt23 = 0.816496580927726;  // sqrt(2/3)

/// (c, r) without conjugation; the moment vectors are real.
Complex pair_with(const CVector& c, const Vector& r) {
  Complex acc = 0;
  for (int i = 0; i < c.size(); ++i) acc += c[i] * r[i];
  return acc;
}

/// One LU factorization of the reduced operator serves every entry.
TransportEntries entries_from_lu(const ResolventWorkspace& ws,
                                 const Eigen::PartialPivLU<CMatrix>& lu) {
  CVector c1 = lu.solve(ws.moment_rhs(1).cast<Complex>());
  CVector c2 = lu.solve(ws.moment_rhs(2).cast<Complex>());
  CVector c4 = lu.solve(ws.moment_rhs(4).cast<Complex>());
  TransportEntries e;
  e.a11 = pair_with(c1, ws.moment_rhs(1));
  e.a14 = pair_with(c1, ws.moment_rhs(4));
  e.a41 = pair_with(c4, ws.moment_rhs(1));
  e.a44 = pair_with(c4, ws.moment_rhs(4));
  e.a22 = pair_with(c2, ws.moment_rhs(2));
  return e;
}

}  // namespace

TransportEntries transport_entries(const ResolventWorkspace& ws, Complex lambda,
                                   Real s) {
  Eigen::PartialPivLU<CMatrix> lu(ws.reduced_operator(lambda, s));
  return entries_from_lu(ws, lu);
}

Real poisson_coupling(SymbolVariant variant, Real eps) {
  if (variant == SymbolVariant::boltzmann) return 0.0;
  if (!(eps > 0)) throw std::invalid_argument("poisson coupling needs eps > 0");
  return 1.0 / (eps * eps);
}

Eigen::Matrix3cd dispersion_matrix(Complex lambda, Real s,
                                   const TransportEntries& e, Real kappa) {
  if (s == 0.0) throw std::invalid_argument("dispersion matrix is singular at s = 0");
  Eigen::Matrix3cd M;
  M(0, 0) = lambda;
  M(0, 1) = kImag * s;
  M(0, 2) = 0.0;
  M(1, 0) = kImag * (s + kappa / s);
  M(1, 1) = lambda - s * s * e.a11;
  M(1, 2) = kImag * s * kSqrt23 - s * s * e.a41;
  M(2, 0) = 0.0;
  M(2, 1) = kImag * s * kSqrt23 - s * s * e.a14;
  M(2, 2) = lambda - s * s * e.a44;
  return M;
}

Complex det_D(const ResolventWorkspace& ws, Complex lambda, Real s, Real kappa) {
  TransportEntries e = transport_entries(ws, lambda, s);
  Complex s2 = s * s;
  return lambda * lambda * lambda - lambda * lambda * s2 * (e.a11 + e.a44) +
         lambda * (kappa + 5.0 / 3.0 * s2 +
                   kImag * kSqrt23 * s2 * s * (e.a41 + e.a14) +
                   s2 * s2 * (e.a11 * e.a44 - e.a41 * e.a14)) -
         (s2 * s2 + kappa * s2) * e.a44;
}

Complex det_D_via_matrix(const ResolventWorkspace& ws, Complex lambda, Real s,
                         Real kappa) {
  return dispersion_matrix(lambda, s, transport_entries(ws, lambda, s), kappa)
      .determinant();
}

Complex det_D0(const ResolventWorkspace& ws, Complex lambda, Real s) {
  TransportEntries e = transport_entries(ws, lambda, s);
  return lambda - s * s * e.a22;
}

namespace {

struct RootResult {
  Complex lambda;
  Real residual = 0;
  Complex correction = 0;  // total displacement from the seed
  bool ok = false;
};

/// Complex Newton with central finite-difference derivative; Muller steps
/// on stagnation. Iterates past the residual tolerance until the step size
/// collapses, so roots with a small determinant derivative (the acoustic
/// pair near s = 0) are still resolved to the evaluation noise floor.
template <typename F>
RootResult find_root(const F& f, Complex seed, Real tol, int max_iterations) {
  RootResult out;
  Complex lambda = seed;
  Complex fval = f(lambda);
  Complex best_lambda = lambda;
  Real best_f = std::abs(fval);
  int stagnation = 0;
  Real last_step = std::numeric_limits<Real>::infinity();
  for (int iter = 0; iter < max_iterations && stagnation < 6; ++iter) {
    if (std::abs(fval) <= tol && last_step <= 1e-13 * (1.0 + std::abs(lambda))) break;
    Real h = 1e-6 * (1.0 + std::abs(lambda));
    if (stagnation < 3) {
      Complex fp = f(lambda + h);
      Complex fm = f(lambda - h);
      Complex deriv = (fp - fm) / (2.0 * h);
      if (std::abs(deriv) < 1e-300) {
        ++stagnation;
        continue;
      }
      Complex next = lambda - fval / deriv;
      Complex fnext = f(next);
      if (std::abs(fnext) < std::abs(fval)) {
        last_step = std::abs(next - lambda);
        lambda = next;
        fval = fnext;
        stagnation = 0;
      } else {
        ++stagnation;
      }
    } else {
      // Muller step through (lambda-h, lambda, lambda+h)
      Complex x0 = lambda - h, x1 = lambda, x2 = lambda + h;
      Complex f0 = f(x0), f1 = fval, f2 = f(x2);
      Complex q = (x2 - x1) / (x1 - x0);
      Complex A = q * f2 - q * (1.0 + q) * f1 + q * q * f0;
      Complex B = (2.0 * q + 1.0) * f2 - (1.0 + q) * (1.0 + q) * f1 + q * q * f0;
      Complex C = (1.0 + q) * f2;
      Complex disc = std::sqrt(B * B - 4.0 * A * C);
      Complex denom = (std::abs(B + disc) > std::abs(B - disc)) ? B + disc : B - disc;
      if (std::abs(denom) < 1e-300) break;
      Complex next = x2 - (x2 - x1) * 2.0 * C / denom;
      last_step = std::abs(next - lambda);
      lambda = next;
      fval = f(lambda);
      stagnation = 0;
    }
    if (std::abs(fval) < best_f) {
      best_f = std::abs(fval);
      best_lambda = lambda;
    }
  }
  out.lambda = best_lambda;
  out.residual = best_f;
  out.correction = best_lambda - seed;
  out.ok = best_f <= tol;
  return out;
}

}  // namespace

CVector build_eigenfunction(const ResolventWorkspace& ws, int j, Real s,
                            Complex lambda, Real kappa) {
  const HermiteBasis& basis = ws.basis();
  Eigen::PartialPivLU<CMatrix> lu(ws.reduced_operator(lambda, s));
  CVector psi;
  int phase_anchor;  // coefficient forced real positive
  if (j == 2 || j == 3) {
    // psi = chi_j + i s R P1(v1 chi_j)
    CVector micro_coords = lu.solve(ws.moment_rhs(j).cast<Complex>());
    psi = basis.chi(j).cast<Complex>() + kImag * s * ws.micro().lift(micro_coords);
    phase_anchor = basis.index_of(j == 2 ? MultiIndex{0, 1, 0} : MultiIndex{0, 0, 1});
  } else if (j >= -1 && j <= 1) {
    TransportEntries e = entries_from_lu(ws, lu);
    Eigen::Matrix3cd M = dispersion_matrix(lambda, s, e, kappa);
    Eigen::JacobiSVD<Eigen::Matrix3cd> svd(M, Eigen::ComputeFullV);
    if (svd.singularValues()[1] < 1e-8 * svd.singularValues()[0]) {
      throw numerical_error("eigenfunction: dispersion matrix null space is degenerate");
    }
    Eigen::Vector3cd U = svd.matrixV().col(2);  // (W0, W.omega, W4)
    CVector macro = U[0] * basis.chi(0).cast<Complex>() +
                    U[1] * basis.chi(1).cast<Complex>() +
                    U[2] * basis.chi(4).cast<Complex>();
    CVector micro_coords =
        lu.solve(U[1] * ws.moment_rhs(1).cast<Complex>() +
                 U[2] * ws.moment_rhs(4).cast<Complex>());
    psi = macro + kImag * s * ws.micro().lift(micro_coords);
    // dominant macroscopic coefficient anchors the phase
    int best = 0;
    for (int k : {1, 2}) {
      if (std::abs(U[k]) > std::abs(U[best])) best = k;
    }
    phase_anchor = best == 0 ? basis.index_of({0, 0, 0})
                 : best == 1 ? basis.index_of({1, 0, 0})
                             : basis.index_of({2, 0, 0});
    if (best == 2) phase_anchor = -2;  // chi_4 coefficient, handled below
  } else {
    throw std::invalid_argument("branch index must be in {-1,0,1,2,3}");
  }

  // bilinear normalization (psi, conj psi)_xi = 1 with the kappa-weighted
  // density term
  Complex q = psi.cwiseProduct(psi).sum() + kappa / (s * s) * psi[0] * psi[0];
  Complex scale = 1.0 / std::sqrt(q);
  psi *= scale;

  // sign fix: anchor coefficient real positive
  Complex anchor;
  if (phase_anchor == -2) {
    anchor = basis.chi(4).cast<Complex>().cwiseProduct(psi).sum();
  } else {
    anchor = psi[phase_anchor];
  }
  if (std::real(anchor) < 0) psi = -psi;
  return psi;
}

namespace {

/// lambda_j(s) = intercept + slope s + O(s^2): plasma intercepts j i / eps
/// for the VPB symbol, acoustic slopes +- i sqrt(5/3) for Boltzmann.
struct BranchModel {
  Complex intercept;
  Complex slope;
};

BranchModel branch_model(int j, Real kappa) {
  if (kappa > 0) return {Complex(0, j * std::sqrt(kappa)), Complex(0, 0)};
  return {Complex(0, 0), Complex(0, j * std::sqrt(5.0 / 3.0))};
}

}  // namespace

BranchFamily continue_branches(const CollisionMatrix& L, const HermiteBasis& basis,
                               const std::vector<Real>& s_grid,
                               const BranchOptions& opts) {
  if (s_grid.empty()) throw std::invalid_argument("branch continuation needs a grid");
  for (size_t i = 0; i + 1 < s_grid.size(); ++i) {
    if (!(s_grid[i] < s_grid[i + 1])) {
      throw std::invalid_argument("branch grid must be strictly increasing");
    }
  }
  if (!(s_grid.front() > 0) || s_grid.front() >= 0.01) {
    throw std::invalid_argument("branch grid must start in (0, 0.01)");
  }
  ResolventWorkspace ws(L, basis);
  Real kappa = poisson_coupling(opts.variant, opts.eps);
  Real mu = L.mu;

  BranchFamily fam;
  for (int j = -1; j <= 3; ++j) fam.branch(j).j = j;

  // longitudinal branches j = -1, 0, 1 follow roots of D; the doubly
  // degenerate shear pair follows the single root of D0
  struct Track {
    int j;
    Complex slope;
    Complex intercept;
    bool alive = true;
    std::vector<std::pair<Real, Complex>> path;
  };
  std::array<Track, 4> tracks;
  for (int k = 0; k < 4; ++k) {
    int j = k - 1;  // -1, 0, 1 longitudinal; k = 3 is the shear track
    BranchModel model = branch_model(k == 3 ? 0 : j, kappa);
    tracks[k] = Track{k == 3 ? 2 : j, model.slope, model.intercept};
  }

  // After removing the known linear part the branches are smooth in s^2,
  // so a two-point extrapolation in s^2 predicts the next root. The
  // back-point is chosen with a baseline comparable to the step ahead;
  // otherwise a near-duplicate grid point would turn the difference
  // quotient into noise.
  auto predict = [](const Track& t, Real s) -> Complex {
    size_t n = t.path.size();
    if (n == 0) return t.intercept + t.slope * s;
    auto reduced = [&](size_t i) {
      return t.path[i].second - t.slope * t.path[i].first;
    };
    if (n == 1) return reduced(0) + t.slope * s;
    Real s2 = t.path[n - 1].first;
    Complex y2 = reduced(n - 1);
    Real step = s * s - s2 * s2;
    for (size_t i = n - 1; i-- > 0;) {
      Real base = s2 * s2 - t.path[i].first * t.path[i].first;
      if (base >= 0.1 * step) {
        return y2 + (y2 - reduced(i)) / base * step + t.slope * s;
      }
    }
    return y2 + t.slope * s;
  };

  for (Real s : s_grid) {
    // predictor separation among the longitudinal roots
    std::array<Complex, 3> preds;
    for (int k = 0; k < 3; ++k) preds[k] = predict(tracks[k], s);

    for (auto& t : tracks) {
      if (!t.alive) continue;
      bool shear = (t.j == 2);
      Complex seed = predict(t, s);
      auto f = [&](Complex lam) {
        return shear ? det_D0(ws, lam, s) : det_D(ws, lam, s, kappa);
      };
      RootResult root;
      try {
        root = find_root(f, seed, opts.residual_tol, opts.max_iterations);
      } catch (const numerical_error& err) {
        t.alive = false;
        fam.branch(t.j).truncated = true;
        fam.branch(t.j).diagnostic = err.what();
        continue;
      }
      if (!root.ok) {
        t.alive = false;
        fam.branch(t.j).truncated = true;
        fam.branch(t.j).diagnostic = "corrector did not reach residual tolerance";
        continue;
      }
      if (std::real(root.lambda) <= -mu / 2) {
        t.alive = false;
        fam.branch(t.j).truncated = true;
        fam.branch(t.j).diagnostic = "root reached the essential half-plane Re <= -mu/2";
        continue;
      }
      if (!shear && !t.path.empty()) {
        Real separation = std::numeric_limits<Real>::infinity();
        for (int k = 0; k < 3; ++k) {
          if (k == t.j + 1) continue;
          separation = std::min(separation, std::abs(preds[t.j + 1] - preds[k]));
        }
        if (std::abs(root.correction) >= 0.1 * separation) {
          t.alive = false;
          fam.branch(t.j).truncated = true;
          fam.branch(t.j).diagnostic = "correction exceeded branch separation margin";
          continue;
        }
      }
      t.path.emplace_back(s, root.lambda);

      BranchSample sample;
      sample.s = s;
      sample.lambda = root.lambda;
      sample.root_residual = root.residual;
      if (shear) {
        fam.branch(2).samples.push_back(sample);
        fam.branch(3).samples.push_back(sample);
      } else {
        fam.branch(t.j).samples.push_back(sample);
      }
    }
  }

  // empirical validity radius: all five branches alive through s
  fam.r0 = 0;
  for (Real s : s_grid) {
    bool all = true;
    for (int j = -1; j <= 3; ++j) {
      if (!fam.branch(j).at(s)) all = false;
    }
    if (all) fam.r0 = s;
  }

  if (opts.build_eigenfunctions) {
    for (int j = -1; j <= 3; ++j) {
      for (BranchSample& sample : fam.branch(j).samples) {
        sample.psi = build_eigenfunction(ws, j, sample.s, sample.lambda, kappa);
        SymbolMatrix sym = (opts.variant == SymbolVariant::vpb)
                               ? assemble_B(L, basis, sample.s, Vec3(1, 0, 0), opts.eps)
                               : assemble_E(L, basis, sample.s, Vec3(1, 0, 0));
        sample.eig_residual =
            (sym.matrix * sample.psi - sample.lambda * sample.psi).norm();
      }
    }
  }
  return fam;
}

Branch continue_branch(const CollisionMatrix& L, const HermiteBasis& basis, int j,
                       const std::vector<Real>& s_grid, Real eps) {
  BranchOptions opts;
  opts.eps = eps;
  return continue_branches(L, basis, s_grid, opts).branch(j);
}

const BranchSample* Branch::at(Real s, Real rel_tol) const {
  for (const BranchSample& sample : samples) {
    if (std::abs(sample.s - s) <= rel_tol * std::max(1.0, std::abs(s))) {
      return &sample;
    }
  }
  return nullptr;
}

std::vector<Real> geometric_grid(Real s_min, Real s_max, int n) {
  if (!(s_min > 0) || !(s_max > s_min) || n < 2) {
    throw std::invalid_argument("geometric grid needs 0 < s_min < s_max, n >= 2");
  }
  std::vector<Real> grid(n);
  for (int i = 0; i < n; ++i) {
    grid[i] = s_min * std::pow(s_max / s_min, static_cast<Real>(i) / (n - 1));
  }
  return grid;
}

}  // namespace vpb
