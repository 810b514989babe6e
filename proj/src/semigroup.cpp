#include "vpb/semigroup.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>

#include "vpb/parallel.hpp"

namespace vpb {

CMatrix matrix_exponential(const CMatrix& A) {
  // [6/6] Pade with scaling and squaring
  const int q = 6;
  Real norm = A.cwiseAbs().rowwise().sum().maxCoeff();  // infinity norm
  int squarings = 0;
  if (norm > 0.5) {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.5))));
  }
  CMatrix X = A / std::pow(2.0, squarings);
  CMatrix X2 = CMatrix::Identity(A.rows(), A.cols());
  CMatrix N = CMatrix::Identity(A.rows(), A.cols());
  CMatrix D = CMatrix::Identity(A.rows(), A.cols());
  Real c = 1.0;
  for (int k = 1; k <= q; ++k) {
    c *= static_cast<Real>(q - k + 1) / static_cast<Real>(k * (2 * q - k + 1));
    X2 = (X2 * X).eval();
    N += c * X2;
    D += ((k % 2 == 0) ? c : -c) * X2;
  }
  CMatrix E = D.partialPivLu().solve(N);
  for (int k = 0; k < squarings; ++k) E = (E * E).eval();
  return E;
}

ModePropagator::ModePropagator(CMatrix generator, Real s)
    : A_(std::move(generator)), s_(s) {
  Eigen::ComplexEigenSolver<CMatrix> es(A_, true);
  if (es.info() != Eigen::Success) {
    use_expm_ = true;
    cond_ = std::numeric_limits<Real>::infinity();
    return;
  }
  V_ = es.eigenvectors();
  evals_ = es.eigenvalues();
  Eigen::PartialPivLU<CMatrix> lu(V_);
  Vinv_ = lu.solve(CMatrix::Identity(A_.rows(), A_.cols()));
  cond_ = V_.norm() * Vinv_.norm() / A_.rows();
  recon_err_ =
      (V_ * evals_.asDiagonal() * Vinv_ - A_).norm() / std::max(A_.norm(), 1e-300);
  if (cond_ > 1e8 || recon_err_ > 1e-8) use_expm_ = true;
}

CVector ModePropagator::coefficients(const CVector& f0) const {
  return Vinv_ * f0;
}

CVector ModePropagator::apply_coefficients(const CVector& coeffs, Real t) const {
  CVector scaled(coeffs.size());
  for (int i = 0; i < coeffs.size(); ++i) scaled[i] = std::exp(evals_[i] * t) * coeffs[i];
  return V_ * scaled;
}

CVector ModePropagator::apply(const CVector& f0, Real t) const {
  if (t == 0.0) return f0;
  if (use_expm_) return matrix_exponential(A_ * Complex(t, 0)) * f0;
  return apply_coefficients(coefficients(f0), t);
}

CVector SplitPropagator::S1(const CVector& f0, Real t) const {
  CVector out = CVector::Zero(f0.size());
  if (!active) return out;
  for (size_t j = 0; j < psi.size(); ++j) {
    Complex coeff = psi[j].cwiseProduct(f0).sum() + weight * psi[j][0] * f0[0];
    out += std::exp(lambda[j] * t) * coeff * psi[j];
  }
  return out;
}

CVector SplitPropagator::S2(const CVector& f0, Real t) const {
  return prop.apply(f0, t) - S1(f0, t);
}

Real SplitPropagator::projector_defect() const {
  Real worst = 0;
  for (size_t j = 0; j < psi.size(); ++j) {
    for (size_t k = 0; k < psi.size(); ++k) {
      Complex g = psi[j].cwiseProduct(psi[k]).sum() + weight * psi[j][0] * psi[k][0];
      worst = std::max(worst, std::abs(g - (j == k ? 1.0 : 0.0)));
    }
  }
  return worst;
}

SplitPropagator make_split_propagator(const CollisionMatrix& L,
                                      const HermiteBasis& basis, Real s, Real r0,
                                      SymbolVariant variant, Real eps) {
  SymbolMatrix sym = (variant == SymbolVariant::vpb)
                         ? assemble_B(L, basis, s, Vec3(1, 0, 0), eps)
                         : assemble_E(L, basis, s, Vec3(1, 0, 0));
  SplitPropagator split{ModePropagator(sym.matrix, s)};
  split.s = s;
  split.weight = poisson_coupling(variant, eps) / (s * s);
  split.active = (s <= r0);
  if (!split.active) return split;

  BranchOptions opts;
  opts.variant = variant;
  opts.eps = eps;
  std::vector<Real> grid;
  for (Real g = std::min(1e-3, 0.5 * s); g < s; g *= 2.2) grid.push_back(g);
  grid.push_back(s);
  BranchFamily fam = continue_branches(L, basis, grid, opts);
  for (int j = -1; j <= 3; ++j) {
    const BranchSample* sample = fam.branch(j).at(s);
    if (!sample || sample->psi.size() == 0) {
      split.active = false;  // continuation did not reach s: S1 switched off
      split.lambda.clear();
      split.psi.clear();
      return split;
    }
    split.lambda.push_back(sample->lambda);
    split.psi.push_back(sample->psi);
  }
  return split;
}

MomentTriple moments_of(const CVector& f, const HermiteBasis& basis) {
  MomentTriple m;
  m.density = f[0];
  m.momentum[0] = f[basis.index_of({1, 0, 0})];
  m.momentum[1] = f[basis.index_of({0, 1, 0})];
  m.momentum[2] = f[basis.index_of({0, 0, 1})];
  m.energy = basis.chi(4).cast<Complex>().cwiseProduct(f).sum();
  return m;
}

MomentTriple s1_leading_moments(const std::map<int, Complex>& lambda, Complex n0,
                                const Eigen::Vector3cd& m0, Complex q0, Real s,
                                Real t) {
  Complex ep = std::exp(lambda.at(1) * t);
  Complex em = std::exp(lambda.at(-1) * t);
  Complex e0 = std::exp(lambda.at(0) * t);
  MomentTriple out;
  out.density = 0.5 * (ep + em) * n0;
  out.momentum.setZero();
  out.momentum[0] = 0.5 * (ep * (m0[0] - n0 / s) + em * (m0[0] + n0 / s));
  out.momentum[1] = std::exp(lambda.at(2) * t) * m0[1];
  out.momentum[2] = std::exp(lambda.at(3) * t) * m0[2];
  out.energy = std::sqrt(1.0 / 6.0) * (ep + em) * n0 +
               e0 * (q0 - std::sqrt(2.0 / 3.0) * n0);
  return out;
}

std::string to_string(FamilyTag tag) {
  return tag == FamilyTag::density_energy ? "density_energy"
                                          : "zero_mean_momentum_energy";
}

CVector InitialDataFamily::mode(const HermiteBasis& basis, Real s) const {
  Real gauss = std::exp(-0.5 * s * s);
  CVector f = CVector::Zero(basis.dimension());
  if (tag == FamilyTag::density_energy) {
    Real amp_n = d0 * std::exp(0.5 * r0 * r0) * gauss;
    Real amp_q = d1 * d0 * std::exp(r0 * r0) * gauss;
    f += amp_n * basis.chi(0).cast<Complex>();
    f += amp_q * basis.chi(4).cast<Complex>();
  } else {
    Real amp = d0 * std::exp(0.5 * r0 * r0) * gauss;
    f += amp * basis.chi(1).cast<Complex>();
    f += amp * basis.chi(4).cast<Complex>();
  }
  return f;
}

std::string to_string(Observable obs) {
  switch (obs) {
    case Observable::density: return "density";
    case Observable::momentum: return "momentum";
    case Observable::energy: return "energy";
    case Observable::efield: return "efield";
    case Observable::micro: return "micro";
    case Observable::hp_norm: return "hp_norm";
  }
  return "?";
}

RadialQuadrature RadialQuadrature::log_grid(Real s_min, Real s_max, int n) {
  if (!(s_min > 0) || !(s_max > s_min) || n < 4) {
    throw std::invalid_argument("radial grid needs 0 < s_min < s_max and n >= 4");
  }
  RadialQuadrature q;
  q.s.resize(n);
  q.w.resize(n);
  Real h = std::log(s_max / s_min) / (n - 1);
  for (int i = 0; i < n; ++i) {
    q.s[i] = s_min * std::exp(i * h);
    Real wlog = (i == 0 || i == n - 1) ? 0.5 * h : h;
    q.w[i] = wlog * q.s[i];  // ds = s dlog(s)
  }
  return q;
}

namespace {

constexpr int kNumObservables = 6;

/// Per-mode squared observable amplitudes.
struct AmplitudeTable {
  // [observable][time]
  std::array<std::vector<Real>, kNumObservables> val;
};

void mode_amplitudes(const ModePropagator& prop, const HermiteBasis& basis,
                     const InitialDataFamily& family, Real s,
                     const std::vector<Real>& times, AmplitudeTable& out) {
  CVector f0 = family.mode(basis, s);
  CVector coeffs = prop.uses_expm() ? CVector() : prop.coefficients(f0);

  int i1 = basis.index_of({1, 0, 0});
  int i2 = basis.index_of({0, 1, 0});
  int i3 = basis.index_of({0, 0, 1});
  CVector c4 = basis.chi(4).cast<Complex>();

  for (int obs = 0; obs < kNumObservables; ++obs) out.val[obs].resize(times.size());
  for (size_t ti = 0; ti < times.size(); ++ti) {
    CVector f = prop.uses_expm() ? prop.apply(f0, times[ti])
                                 : prop.apply_coefficients(coeffs, times[ti]);
    Complex nhat = f[0];
    Complex m1 = f[i1], m2 = f[i2], m3 = f[i3];
    Complex qhat = c4.cwiseProduct(f).sum();
    Real mom2 = std::norm(m1) + std::norm(m2) + std::norm(m3);
    // microscopic residual after removing the five moment directions
    CVector macro = nhat * basis.chi(0).cast<Complex>() + qhat * c4;
    macro[i1] += m1;
    macro[i2] += m2;
    macro[i3] += m3;
    Real micro2 = (f - macro).squaredNorm();
    Real f2 = f.squaredNorm();

    out.val[0][ti] = std::norm(nhat);
    out.val[1][ti] = mom2;
    out.val[2][ti] = std::norm(qhat);
    out.val[3][ti] = std::norm(nhat) / (s * s);
    out.val[4][ti] = micro2;
    out.val[5][ti] = f2 + std::norm(nhat) / (s * s);
  }
}

std::vector<DecayHarnessResult> run_harness(
    const std::vector<InitialDataFamily>& families, const CollisionMatrix& L,
    const HermiteBasis& basis, const std::vector<Real>& times,
    const RadialQuadrature& quad, const DecayHarnessOptions& opts) {
  const int ns = static_cast<int>(quad.s.size());
  const int nf = static_cast<int>(families.size());
  // [family][radial] amplitude tables, filled in parallel over s
  std::vector<std::vector<AmplitudeTable>> tables(nf);
  for (auto& t : tables) t.resize(ns);
  parallel_for(ns, opts.threads, [&](int i) {
    Real s = quad.s[i];
    SymbolMatrix sym = (opts.variant == SymbolVariant::vpb)
                           ? assemble_B(L, basis, s, Vec3(1, 0, 0), opts.eps)
                           : assemble_E(L, basis, s, Vec3(1, 0, 0));
    ModePropagator prop(sym.matrix, s);  // one eigensolve shared by all families
    for (int fi = 0; fi < nf; ++fi) {
      mode_amplitudes(prop, basis, families[fi], s, times, tables[fi][i]);
    }
  });

  std::vector<DecayHarnessResult> results(nf);
  for (int fi = 0; fi < nf; ++fi) {
    for (int obs = 0; obs < kNumObservables; ++obs) {
      // the field-driven observables exist only for the Poisson-coupled symbol
      if (opts.variant == SymbolVariant::boltzmann &&
          (static_cast<Observable>(obs) == Observable::efield ||
           static_cast<Observable>(obs) == Observable::hp_norm)) {
        continue;
      }
      NormSeries series;
      series.t = times;
      series.value.resize(times.size());
      for (size_t ti = 0; ti < times.size(); ++ti) {
        Real acc = 0;
        for (int i = 0; i < ns; ++i) {
          Real shell = 4.0 * M_PI * quad.s[i] * quad.s[i] *
                       std::pow(quad.s[i], 2.0 * opts.alpha);
          acc += quad.w[i] * shell * tables[fi][i].val[obs][ti];
        }
        series.value[ti] = std::sqrt(acc);
      }
      results[fi].series[static_cast<Observable>(obs)] = std::move(series);
    }
  }
  return results;
}

}  // namespace

std::vector<DecayHarnessResult> assemble_physical_norms(
    const std::vector<InitialDataFamily>& families, const CollisionMatrix& L,
    const HermiteBasis& basis, const std::vector<Real>& times,
    const RadialQuadrature& quad, const DecayHarnessOptions& opts) {
  std::vector<DecayHarnessResult> base = run_harness(families, L, basis, times, quad, opts);
  if (opts.convergence_check) {
    RadialQuadrature fine = RadialQuadrature::log_grid(
        quad.s.front(), quad.s.back(), 2 * static_cast<int>(quad.s.size()));
    DecayHarnessOptions sub = opts;
    sub.convergence_check = false;
    std::vector<DecayHarnessResult> refined =
        run_harness(families, L, basis, times, fine, sub);
    for (size_t fi = 0; fi < families.size(); ++fi) {
      Real worst = 0;
      for (const auto& [obs, series] : base[fi].series) {
        const NormSeries& fine_series = refined[fi].series.at(obs);
        for (size_t ti = 0; ti < series.value.size(); ++ti) {
          Real denom = std::max(fine_series.value[ti], 1e-300);
          worst = std::max(worst, std::abs(series.value[ti] - fine_series.value[ti]) / denom);
        }
      }
      base[fi].max_rel_change = worst;
      base[fi].quadrature_converged = worst < opts.convergence_tol;
    }
  }
  return base;
}

DecayHarnessResult assemble_physical_norms(const InitialDataFamily& family,
                                           const CollisionMatrix& L,
                                           const HermiteBasis& basis,
                                           const std::vector<Real>& times,
                                           const RadialQuadrature& quad,
                                           const DecayHarnessOptions& opts) {
  return assemble_physical_norms(std::vector<InitialDataFamily>{family}, L, basis,
                                 times, quad, opts)[0];
}

DecayFit fit_exponent(const NormSeries& series, Real t1, Real t2,
                      Real residual_threshold) {
  DecayFit fit;
  fit.t1 = t1;
  fit.t2 = t2;
  std::vector<Real> x, y;
  for (size_t i = 0; i < series.t.size(); ++i) {
    if (series.t[i] < t1 || series.t[i] > t2) continue;
    if (!(series.value[i] > 0)) {
      throw std::invalid_argument("decay fit needs positive norms on the window");
    }
    x.push_back(std::log(1.0 + series.t[i]));
    y.push_back(std::log(series.value[i]));
  }
  fit.n_points = static_cast<int>(x.size());
  if (fit.n_points < 10) {
    throw std::invalid_argument("decay fit needs at least 10 samples in the window");
  }
  Real xbar = 0, ybar = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    xbar += x[i];
    ybar += y[i];
  }
  xbar /= x.size();
  ybar /= y.size();
  Real sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  fit.exponent = sxy / sxx;
  Real ss_res = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    Real r = y[i] - ybar - fit.exponent * (x[i] - xbar);
    ss_res += r * r;
  }
  fit.residual = std::sqrt(ss_res / x.size());
  if (x.size() > 2) {
    fit.stderr_ = std::sqrt(ss_res / (x.size() - 2) / sxx);
  }
  fit.oscillation_flag = fit.residual > residual_threshold;
  return fit;
}

std::vector<Real> time_grid(Real t_min, Real t_max, int n) {
  if (!(t_min > 0) || !(t_max > t_min) || n < 2) {
    throw std::invalid_argument("time grid needs 0 < t_min < t_max and n >= 2");
  }
  std::vector<Real> t(n);
  for (int i = 0; i < n; ++i) {
    t[i] = t_min * std::pow(t_max / t_min, static_cast<Real>(i) / (n - 1));
  }
  return t;
}

NspSymbol assemble_nsp(Real eta, Real alpha_heat, Real s) {
  if (!(s > 0)) throw std::invalid_argument("NSP symbol needs s > 0");
  NspSymbol sym;
  sym.s = s;
  sym.eta = eta;
  sym.alpha_heat = alpha_heat;
  const Real c = std::sqrt(2.0 / 3.0);
  CMatrix5& D = sym.matrix;
  D.setZero();
  D(0, 1) = -kImag * s;
  D(1, 0) = -kImag * s * (1.0 + 1.0 / (s * s));
  D(1, 1) = -eta * (s * s + s * s / 3.0);  // longitudinal: xi tensor xi adds s^2/3
  D(2, 2) = -eta * s * s;
  D(3, 3) = -eta * s * s;
  D(1, 4) = -kImag * c * s;
  D(4, 1) = -kImag * c * s;
  D(4, 4) = -alpha_heat * s * s;
  return sym;
}

namespace {

NspDecayResult run_nsp(Real eta, Real alpha_heat, NspFamily family,
                       const std::vector<Real>& times, const RadialQuadrature& quad,
                       int threads) {
  const int ns = static_cast<int>(quad.s.size());
  std::vector<std::array<std::vector<Real>, 3>> amp(ns);
  parallel_for(ns, threads, [&](int i) {
    Real s = quad.s[i];
    NspSymbol sym = assemble_nsp(eta, alpha_heat, s);
    ModePropagator prop(CMatrix(sym.matrix), s);
    CVector u0 = CVector::Zero(5);
    Real gauss = std::exp(-0.5 * s * s);
    if (family == NspFamily::gaussian_density_temperature) {
      u0[0] = gauss;
      u0[4] = gauss;
    } else {
      u0[1] = gauss;  // longitudinal momentum, zero density
      u0[4] = gauss;
    }
    for (int k = 0; k < 3; ++k) amp[i][k].resize(times.size());
    CVector coeffs = prop.uses_expm() ? CVector() : prop.coefficients(u0);
    for (size_t ti = 0; ti < times.size(); ++ti) {
      CVector u = prop.uses_expm() ? prop.apply(u0, times[ti])
                                   : prop.apply_coefficients(coeffs, times[ti]);
      amp[i][0][ti] = std::norm(u[0]);
      amp[i][1][ti] = std::norm(u[1]) + std::norm(u[2]) + std::norm(u[3]);
      amp[i][2][ti] = std::norm(u[4]);
    }
  });
  NspDecayResult out;
  NormSeries* channels[3] = {&out.n, &out.m, &out.theta};
  for (int k = 0; k < 3; ++k) {
    channels[k]->t = times;
    channels[k]->value.resize(times.size());
    for (size_t ti = 0; ti < times.size(); ++ti) {
      Real acc = 0;
      for (int i = 0; i < ns; ++i) {
        acc += quad.w[i] * 4.0 * M_PI * quad.s[i] * quad.s[i] * amp[i][k][ti];
      }
      channels[k]->value[ti] = std::sqrt(acc);
    }
  }
  return out;
}

}  // namespace

NspDecayResult nsp_decay(Real eta, Real alpha_heat, NspFamily family,
                         const std::vector<Real>& times,
                         const RadialQuadrature& quad, int threads,
                         bool convergence_check) {
  NspDecayResult base = run_nsp(eta, alpha_heat, family, times, quad, threads);
  if (convergence_check) {
    RadialQuadrature fine = RadialQuadrature::log_grid(
        quad.s.front(), quad.s.back(), 2 * static_cast<int>(quad.s.size()));
    NspDecayResult refined = run_nsp(eta, alpha_heat, family, times, fine, threads);
    Real worst = 0;
    const NormSeries* a[3] = {&base.n, &base.m, &base.theta};
    const NormSeries* b[3] = {&refined.n, &refined.m, &refined.theta};
    for (int k = 0; k < 3; ++k) {
      for (size_t ti = 0; ti < a[k]->value.size(); ++ti) {
        Real denom = std::max(b[k]->value[ti], 1e-300);
        worst = std::max(worst, std::abs(a[k]->value[ti] - b[k]->value[ti]) / denom);
      }
    }
    base.max_rel_change = worst;
    base.quadrature_converged = worst < 1e-3;
  }
  return base;
}

}  // namespace vpb
