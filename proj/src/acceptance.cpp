#include "vpb/acceptance.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "vpb/asymptotics.hpp"
#include "vpb/semigroup.hpp"

namespace vpb {

namespace {

using Clock = std::chrono::steady_clock;

struct Checker {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAIL[" << what << "]";
    }
  }
  void note(const std::string& what) { detail << " " << what; }
};

std::string fmt(Real v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

Real multiset_gap(const std::vector<Complex>& A, const std::vector<Complex>& B) {
  Real worst = 0;
  for (const Complex& a : A) {
    Real best = std::numeric_limits<Real>::infinity();
    for (const Complex& b : B) best = std::min(best, std::abs(a - b));
    worst = std::max(worst, best);
  }
  return worst;
}

std::vector<Complex> spectrum_of(const CMatrix& M) {
  Eigen::ComplexEigenSolver<CMatrix> es(M, false);
  std::vector<Complex> out(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
  return out;
}

std::vector<Real> merge_grids(std::vector<Real> a, const std::vector<Real>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end(),
                      [](Real x, Real y) { return std::abs(x - y) < 1e-6 * (1.0 + x); }),
          a.end());
  return a;
}

struct RateCase {
  Observable obs;
  Real expected;
};

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  std::vector<CriterionResult> results;
  auto run = [&](int id, const std::string& name, auto&& body) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    Checker ck;
    auto start = Clock::now();
    try {
      body(ck);
    } catch (const std::exception& e) {
      ck.pass = false;
      ck.detail << " EXCEPTION[" << e.what() << "]";
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    r.pass = ck.pass;
    r.detail = ck.detail.str();
    results.push_back(r);
  };

  HermiteBasis basis8(8);
  HermiteBasis basis6(6);
  CollisionMatrix bgk = assemble_bgk(1.0, basis8);
  CollisionMatrix spectral = assemble_spectral_relaxation(
      RelaxationSpectrum::graded(0.8, 0.2, basis8), basis8);

  // ---------------------------------------------------------------- 1
  run(1, "closed-form coefficients (BGK nu0=1, K=8)", [&](Checker& ck) {
    auto t0 = Clock::now();
    CoefficientSet c = vpb_coefficients(bgk, basis8);
    BoltzmannCoefficientSet cb = boltzmann_coefficients(bgk, basis8);
    double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    Real err = std::max({std::abs(c.a0 - 5.0 / 3.0), std::abs(c.a1 - 1.0 / 3.0),
                         std::abs(c.a2 - 1.0), std::abs(c.b1 - 7.0 / 6.0),
                         std::abs(cb.a_pm1 - 1.0), std::abs(cb.a0 - 1.0),
                         std::abs(cb.a2 - 1.0)});
    ck.require(err <= 1e-10, "coefficients within 1e-10");
    ck.require(elapsed < 1.0, "runtime < 1 s");
    ck.note("max|err|=" + fmt(err) + " t=" + fmt(elapsed) + "s");
  });

  // ---------------------------------------------------------------- 2
  run(2, "dual-route eigenvalues (3 models, 10 frequencies)", [&](Checker& ck) {
    auto t0 = Clock::now();
    struct Case {
      const CollisionMatrix* L;
      const HermiteBasis* basis;
      Real tol;
      std::string name;
    };
    CollisionMatrix hs = assemble_hard_sphere_cached(
        basis6, HardSphereQuadrature{10, 0, 0}, opts.cache_dir, opts.threads);
    std::vector<Case> cases = {{&bgk, &basis8, 1e-8, "bgk"},
                               {&spectral, &basis8, 1e-8, "spectral"},
                               {&hs, &basis6, 1e-5, "hard_sphere"}};
    for (const Case& c : cases) {
      BranchFamily probe = probe_branch_family(*c.L, *c.basis);
      ck.require(probe.r0 > 1e-2, c.name + ": usable branch radius");
      // the exact truncation point wobbles with grid placement: keep the
      // comparison targets safely inside the probed radius
      std::vector<Real> targets = geometric_grid(1e-3, 0.9 * probe.r0, 10);
      std::vector<Real> grid = merge_grids(targets, geometric_grid(1e-3, 0.9 * probe.r0, 24));
      BranchOptions bopts;
      bopts.build_eigenfunctions = false;
      BranchFamily fam = continue_branches(*c.L, *c.basis, grid, bopts);
      Real worst = 0;
      for (Real s : targets) {
        const BranchSample* anchor = fam.branch(0).at(s, 1e-5);
        ck.require(anchor != nullptr, c.name + ": branch reaches target s");
        if (!anchor) continue;
        SymbolMatrix sym = assemble_B(*c.L, *c.basis, anchor->s, Vec3(1, 0, 0), 1.0);
        auto modes = rightmost_modes(sym, -c.L->mu / 2);
        ck.require(modes.size() == 5, c.name + ": five dense eigenvalues");
        for (int j = -1; j <= 3; ++j) {
          const BranchSample* sample = fam.branch(j).at(anchor->s);
          ck.require(sample != nullptr, c.name + ": branch reaches target s");
          if (!sample) continue;
          Real best = std::numeric_limits<Real>::infinity();
          for (const auto& m : modes) best = std::min(best, std::abs(m.lambda - sample->lambda));
          worst = std::max(worst, best);
        }
      }
      ck.require(worst <= c.tol, c.name + ": route gap <= " + fmt(c.tol));
      ck.note(c.name + ":gap=" + fmt(worst) + ",r0=" + fmt(probe.r0));
    }
    double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    ck.require(elapsed < 60.0, "runtime < 1 min");
    ck.note("t=" + fmt(elapsed) + "s");
  });

  // ---------------------------------------------------------------- 3
  run(3, "expansion validation (remainder ratios, lambda''(0))", [&](Checker& ck) {
    std::vector<Real> spec_points = {1e-3, 2e-3, 4e-3};
    std::vector<Real> grid = merge_grids(spec_points, {6e-3, 8e-3, 1e-2, 1.2e-2});
    BranchOptions bopts;
    bopts.build_eigenfunctions = false;
    BranchFamily fam = continue_branches(bgk, basis8, grid, bopts);
    CoefficientSet c = vpb_coefficients(bgk, basis8);
    for (int j = -1; j <= 3; ++j) {
      Complex intercept(0, (j == 2 || j == 3) ? 0 : j);
      ExpansionReport rep = validate_expansion(fam.branch(j), intercept, Complex(0, 0),
                                               c.lambda_second[j]);
      // monotone decrease over the three pinned frequencies
      Real r4 = 0, r2 = 0, r1 = 0;
      for (const ExpansionRow& row : rep.rows) {
        if (std::abs(row.s - 4e-3) < 1e-12) r4 = row.ratio;
        if (std::abs(row.s - 2e-3) < 1e-12) r2 = row.ratio;
        if (std::abs(row.s - 1e-3) < 1e-12) r1 = row.ratio;
      }
      ck.require(r1 < r2 && r2 < r4, "branch " + std::to_string(j) + ": monotone ratio");

      const BranchSample* s1 = fam.branch(j).at(1e-3);
      const BranchSample* s2 = fam.branch(j).at(2e-3);
      Complex fd = lambda_second_fd(s1->lambda, s2->lambda, 1e-3, intercept,
                                    Complex(0, 0), true);
      Complex formula = lambda_second_alt(bgk, basis8, j);
      ck.require(std::abs(fd - c.lambda_second[j]) <= 0.01 * std::abs(c.lambda_second[j]),
                 "branch " + std::to_string(j) + ": fd vs (2.60)/(2.61)");
      ck.require(std::abs(fd - formula) <= 0.01 * std::abs(formula),
                 "branch " + std::to_string(j) + ": fd vs (2.66)");
    }
  });

  // ---------------------------------------------------------------- 4
  run(4, "structural invariants (3 models x 5 frequencies)", [&](Checker& ck) {
    CollisionMatrix hs = assemble_hard_sphere_cached(
        basis6, HardSphereQuadrature{10, 0, 0}, opts.cache_dir, opts.threads);
    struct Case {
      const CollisionMatrix* L;
      const HermiteBasis* basis;
      bool exact_rotation;
      std::string name;
    };
    std::vector<Case> cases = {{&bgk, &basis8, true, "bgk"},
                               {&spectral, &basis8, true, "spectral"},
                               {&hs, &basis6, false, "hard_sphere"}};
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<Real> dist;
    for (const Case& c : cases) {
      const HermiteBasis& b = *c.basis;
      const Matrix& L = c.L->matrix;
      ProjectionSet ps = projections(b);

      // kernel and coercivity
      Real kernel = 0;
      for (int j = 0; j <= 4; ++j) kernel = std::max(kernel, (L * b.chi(j)).norm());
      ck.require(kernel <= 1e-12 * std::max(1.0, L.norm()), c.name + ": kernel");
      for (int trial = 0; trial < 50; ++trial) {
        Vector f(b.dimension());
        for (int i = 0; i < f.size(); ++i) f[i] = dist(rng);
        f = (ps.P1 * f).eval();
        ck.require(f.dot(L * f) <= -c.L->mu * f.squaredNorm() + 1e-10 * L.norm() * f.squaredNorm(),
                   c.name + ": coercivity");
      }

      for (Real s : {0.05, 0.2, 0.8, 3.0, 10.0}) {
        // weighted self-adjointness of i A(xi)
        AcousticMatrix A = assemble_A(s);
        CMatrix5 G5 = CMatrix5::Identity();
        G5(0, 0) += 1.0 / (s * s);
        CMatrix5 iA = kImag * A.matrix;
        ck.require((G5 * iA - iA.adjoint() * G5).cwiseAbs().maxCoeff() <= 1e-12,
                   c.name + ": iA weighted-Hermitian");

        SymbolMatrix sym = assemble_B(*c.L, b, s, Vec3(1, 0, 0), 1.0);

        // adjoint identity B(xi)* = B(-xi) in the weighted metric
        CMatrix Gm = CMatrix::Identity(b.dimension(), b.dimension());
        Gm(0, 0) += 1.0 / (s * s);
        CMatrix Gi = CMatrix::Identity(b.dimension(), b.dimension());
        Gi(0, 0) = 1.0 / Gm(0, 0).real();
        Real adjoint_defect =
            (Gi * sym.matrix.adjoint() * Gm - sym.matrix.conjugate()).cwiseAbs().maxCoeff();
        ck.require(adjoint_defect <= 1e-10, c.name + ": adjoint identity");

        // conjugation symmetry of the branch window (clustered essential
        // eigenvalues only carry eigensolver accuracy)
        auto ev = spectrum_of(sym.matrix);
        std::vector<Complex> window, window_conj, full_conj;
        for (const Complex& e : ev) {
          full_conj.push_back(std::conj(e));
          if (std::real(e) > -c.L->mu / 2) {
            window.push_back(e);
            window_conj.push_back(std::conj(e));
          }
        }
        if (!window.empty()) {
          ck.require(multiset_gap(window, window_conj) <= 1e-10,
                     c.name + ": conjugation symmetry (branch window)");
        }
        ck.require(multiset_gap(ev, full_conj) <= 1e-6 * (1.0 + sym.matrix.norm()),
                   c.name + ": conjugation symmetry (full)");

        // rotation invariance
        Vec3 omega(dist(rng), dist(rng), dist(rng));
        omega.normalize();
        SymbolMatrix symw = assemble_B(*c.L, b, s, omega, 1.0);
        Mat3 O = Eigen::Quaterniond::FromTwoVectors(Vec3(1, 0, 0), omega).toRotationMatrix();
        CMatrix R = b.rotation_matrix(O).cast<Complex>();
        Real sim = (R * sym.matrix * R.adjoint() - symw.matrix).norm() / symw.matrix.norm();
        if (c.exact_rotation) {
          ck.require(sim <= 1e-10, c.name + ": rotation similarity");
          auto evw = spectrum_of(symw.matrix);
          std::vector<Complex> windoww;
          for (const Complex& e : evw) {
            if (std::real(e) > -c.L->mu / 2) windoww.push_back(e);
          }
          if (!window.empty() && window.size() == windoww.size()) {
            ck.require(multiset_gap(window, windoww) <= 1e-10,
                       c.name + ": rotation invariance (branch window)");
          }
        } else {
          ck.require(sim <= 5e-2, c.name + ": rotation similarity (quadrature tol)");
          ck.note("hs_rot=" + fmt(sim));
        }
      }
    }
  });

  // ---------------------------------------------------------------- 5
  run(5, "spectral gap scan (BGK and hard sphere)", [&](Checker& ck) {
    auto t0 = Clock::now();
    CollisionMatrix hs = assemble_hard_sphere_cached(
        basis6, HardSphereQuadrature{10, 0, 0}, opts.cache_dir, opts.threads);
    struct Case {
      const CollisionMatrix* L;
      const HermiteBasis* basis;
      std::string name;
    };
    for (const auto& c : std::vector<Case>{{&bgk, &basis8, "bgk"},
                                           {&hs, &basis6, "hard_sphere"}}) {
      std::vector<Real> grid = geometric_grid(0.5, 20.0, 40);
      auto scan = spectral_gap_scan(*c.L, *c.basis, grid, 1.0, -c.L->mu / 2, opts.threads);
      Real worst = -std::numeric_limits<Real>::infinity();
      for (const GapScanPoint& p : scan) {
        ck.require(p.ok, c.name + ": per-mode eigensolve");
        if (p.count_window > 0) worst = std::max(worst, p.max_re_window);
      }
      ck.require(worst < 0.0, c.name + ": max Re < 0 in the window");
      ck.note(c.name + ":maxRe=" + fmt(worst));
    }
    double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    ck.require(elapsed < 120.0, "runtime < 2 min");
    ck.note("t=" + fmt(elapsed) + "s");
  });

  // ---------------------------------------------------------------- 6
  run(6, "semigroup split (S1 + S2 = S, sigma0 > 0, contraction)", [&](Checker& ck) {
    BranchFamily probe = probe_branch_family(bgk, basis8);
    Real r0 = probe.r0;
    std::mt19937_64 rng(opts.seed + 6);
    std::normal_distribution<Real> dist;
    for (Real s : {0.01, 0.3 * r0, 0.7 * r0, 0.95 * r0, 1.2 * r0, 3.0}) {
      SplitPropagator split = make_split_propagator(bgk, basis8, s, r0);
      CVector f0(basis8.dimension());
      for (int i = 0; i < f0.size(); ++i) f0[i] = Complex(dist(rng), dist(rng));
      Real prev = std::numeric_limits<Real>::infinity();
      std::vector<Real> ts, ys;
      for (Real t : {0.0, 0.5, 1.0, 2.0, 3.0, 4.5, 6.0, 8.0}) {
        CVector sum = split.S1(f0, t) + split.S2(f0, t);
        ck.require((sum - split.prop.apply(f0, t)).norm() <= 1e-10 * f0.norm(),
                   "split consistency");
        Real norm = weighted_norm(split.prop.apply(f0, t), s);
        ck.require(norm <= prev + 1e-10, "weighted contraction");
        prev = norm;
        Real s2norm = weighted_norm(split.S2(f0, t), s);
        if (s2norm > 1e-250) {
          ts.push_back(t);
          ys.push_back(std::log(s2norm));
        }
      }
      if (split.active) {
        ck.require(split.projector_defect() <= 1e-8, "projector defect");
      }
      Real tb = 0, yb = 0;
      for (size_t i = 0; i < ts.size(); ++i) { tb += ts[i]; yb += ys[i]; }
      tb /= ts.size();
      yb /= ys.size();
      Real num = 0, den = 0;
      for (size_t i = 0; i < ts.size(); ++i) {
        num += (ts[i] - tb) * (ys[i] - yb);
        den += (ts[i] - tb) * (ts[i] - tb);
      }
      Real sigma0 = -num / den;
      ck.require(sigma0 > 0, "sigma0 > 0 at s=" + fmt(s));
    }
    ck.note("r0=" + fmt(r0));
  });

  // ---------------------------------------------------------------- 7
  run(7, "VPB optimal decay rates (Theorem-3.6 table)", [&](Checker& ck) {
    auto t0 = Clock::now();
    RadialQuadrature quad = RadialQuadrature::log_grid(1e-3, 20.0, 240);
    std::vector<Real> times = time_grid(1.0, 1e4, 240);
    DecayHarnessOptions hopts;
    hopts.threads = opts.threads;
    std::vector<InitialDataFamily> families = {
        InitialDataFamily{FamilyTag::density_energy, 1.0, 1.0, 0.5},
        InitialDataFamily{FamilyTag::zero_mean_momentum_energy, 1.0, 1.0, 0.5}};
    auto res = assemble_physical_norms(families, bgk, basis8, times, quad, hopts);
    std::vector<std::vector<RateCase>> expect = {
        {{Observable::density, -0.75}, {Observable::momentum, -0.25},
         {Observable::energy, -0.75}, {Observable::efield, -0.25},
         {Observable::micro, -0.75}, {Observable::hp_norm, -0.25}},
        {{Observable::density, -1.25}, {Observable::momentum, -0.75},
         {Observable::energy, -0.75}, {Observable::efield, -0.75},
         {Observable::micro, -1.25}, {Observable::hp_norm, -0.75}}};
    for (size_t fi = 0; fi < families.size(); ++fi) {
      ck.require(res[fi].quadrature_converged,
                 to_string(families[fi].tag) + ": radial quadrature converged");
      for (const RateCase& rc : expect[fi]) {
        DecayFit fit = fit_exponent(res[fi].series.at(rc.obs), 1e2, 1e4);
        ck.require(std::abs(fit.exponent - rc.expected) <= 0.08,
                   to_string(families[fi].tag) + "/" + to_string(rc.obs));
        ck.note(to_string(rc.obs).substr(0, 3) + (fi == 0 ? "" : "'") + "=" +
                fmt(fit.exponent));
      }
    }
    double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    ck.require(elapsed < 600.0, "runtime < 10 min");
    ck.note("t=" + fmt(elapsed) + "s");
  });

  // ---------------------------------------------------------------- 8
  run(8, "Boltzmann contrast (acoustic slope, rate table)", [&](Checker& ck) {
    BranchOptions bopts;
    bopts.variant = SymbolVariant::boltzmann;
    bopts.build_eigenfunctions = false;
    BranchFamily fam = continue_branches(
        bgk, basis8, {1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2}, bopts);
    Real acoustic = std::sqrt(5.0 / 3.0);
    for (int j : {-1, 1}) {
      const BranchSample* s = fam.branch(j).at(1e-3);
      ck.require(s != nullptr, "acoustic branch at s=1e-3");
      if (s) {
        ck.require(std::abs(std::imag(s->lambda) / 1e-3 - j * acoustic) <= 1e-3,
                   "leading slope sqrt(5/3)");
      }
    }

    // The acoustic phase sqrt(5/3) s t needs a fine radial grid at the top
    // of the fit window; 240 points leave the doubling test at the percent
    // level, 960 brings it below the 0.1% gate.
    RadialQuadrature quad = RadialQuadrature::log_grid(1e-3, 20.0, 960);
    std::vector<Real> times = time_grid(1.0, 1e4, 240);
    DecayHarnessOptions hopts;
    hopts.threads = opts.threads;
    hopts.variant = SymbolVariant::boltzmann;
    InitialDataFamily family{FamilyTag::density_energy, 1.0, 1.0, 0.5};
    DecayHarnessResult res = assemble_physical_norms(family, bgk, basis8, times, quad, hopts);
    ck.require(res.quadrature_converged, "radial quadrature converged");
    for (const RateCase& rc :
         {RateCase{Observable::density, -0.75}, RateCase{Observable::momentum, -0.75},
          RateCase{Observable::energy, -0.75}, RateCase{Observable::micro, -1.25}}) {
      DecayFit fit = fit_exponent(res.series.at(rc.obs), 1e2, 1e4);
      ck.require(std::abs(fit.exponent - rc.expected) <= 0.08,
                 "boltzmann/" + to_string(rc.obs));
      ck.note(to_string(rc.obs).substr(0, 3) + "=" + fmt(fit.exponent));
    }
  });

  // ---------------------------------------------------------------- 9
  run(9, "epsilon study (plasma intercepts 1/eps)", [&](Checker& ck) {
    Real probe_s = 4e-3;
    std::map<Real, Complex> at_probe;
    for (Real eps : {1.0, 2.0, 10.0}) {
      BranchOptions bopts;
      bopts.eps = eps;
      bopts.build_eigenfunctions = false;
      BranchFamily fam = continue_branches(bgk, basis8, {1e-3, 2e-3, 4e-3}, bopts);
      for (int j : {-1, 1}) {
        const BranchSample* s1 = fam.branch(j).at(1e-3);
        const BranchSample* s2 = fam.branch(j).at(2e-3);
        ck.require(s1 && s2, "branches at eps=" + fmt(eps));
        if (!s1 || !s2) continue;
        Complex extrap = (4.0 * s1->lambda - s2->lambda) / 3.0;
        ck.require(std::abs(std::imag(extrap) - j / eps) <= 1e-6,
                   "intercept Im at eps=" + fmt(eps));
        ck.require(std::abs(std::real(extrap)) <= 1e-6,
                   "intercept Re at eps=" + fmt(eps));
      }
      at_probe[eps] = fam.branch(1).at(probe_s)->lambda;
    }
    // qualitative: approach toward the Boltzmann acoustic branch as eps grows
    BranchOptions bopts;
    bopts.variant = SymbolVariant::boltzmann;
    bopts.build_eigenfunctions = false;
    BranchFamily bfam = continue_branches(bgk, basis8, {1e-3, 2e-3, 4e-3}, bopts);
    Complex target = bfam.branch(1).at(probe_s)->lambda;
    ck.note("d(eps)=|lambda_1(s*)-boltzmann|:");
    for (auto& [eps, lam] : at_probe) {
      ck.note("eps" + fmt(eps) + ":" + fmt(std::abs(lam - target)));
    }
  });

  // ---------------------------------------------------------------- 10
  run(10, "NSP fluid comparison (Lemma-5.1 rates)", [&](Checker& ck) {
    auto t0 = Clock::now();
    CoefficientSet c = vpb_coefficients(bgk, basis8);
    RadialQuadrature quad = RadialQuadrature::log_grid(1e-3, 20.0, 240);
    std::vector<Real> times = time_grid(1.0, 1e4, 240);
    NspDecayResult g = nsp_decay(c.a2, c.a0, NspFamily::gaussian_density_temperature,
                                 times, quad, opts.threads);
    NspDecayResult z = nsp_decay(c.a2, c.a0, NspFamily::zero_density, times, quad,
                                 opts.threads);
    ck.require(g.quadrature_converged && z.quadrature_converged, "quadrature converged");
    struct Row {
      const NormSeries* series;
      Real expected;
      std::string name;
    };
    for (const Row& row : {Row{&g.n, -0.75, "n"}, Row{&g.m, -0.25, "m"},
                           Row{&g.theta, -0.75, "theta"}, Row{&z.n, -1.25, "n0"},
                           Row{&z.m, -0.75, "m0"}, Row{&z.theta, -0.75, "theta0"}}) {
      DecayFit fit = fit_exponent(*row.series, 1e2, 1e4);
      ck.require(std::abs(fit.exponent - row.expected) <= 0.08, "nsp/" + row.name);
      ck.note(row.name + "=" + fmt(fit.exponent));
    }
    double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    ck.require(elapsed < 60.0, "runtime < 1 min");
    ck.note("t=" + fmt(elapsed) + "s");
  });

  // ---------------------------------------------------------------- 11
  run(11, "eigenfunction orthonormality and leading terms", [&](Checker& ck) {
    BranchFamily probe = probe_branch_family(bgk, basis8);
    Real r0 = probe.r0;
    std::vector<Real> ss = {0.02, 0.05, r0 / 2};
    std::vector<Real> grid = merge_grids({1e-3, 2e-3, 4e-3, 8e-3}, ss);
    BranchFamily fam = continue_branches(bgk, basis8, grid);
    for (Real s : ss) {
      Real worst = 0;
      for (int j = -1; j <= 3; ++j) {
        for (int k = -1; k <= 3; ++k) {
          const BranchSample* sj = fam.branch(j).at(s);
          const BranchSample* sk = fam.branch(k).at(s);
          ck.require(sj && sk, "eigenfunctions at s=" + fmt(s));
          if (!sj || !sk) continue;
          Complex g = weighted_bilinear(sj->psi, sk->psi, s);
          worst = std::max(worst, std::abs(g - (j == k ? 1.0 : 0.0)));
        }
      }
      ck.require(worst <= 1e-8, "orthonormality at s=" + fmt(s));
      ck.note("orth(" + fmt(s) + ")=" + fmt(worst));
    }

    // leading-term table: psi_{0,0} = chi_4, psi_{+-1,0} = (sqrt2/2)(v.w)M^1/2
    CVector c4 = basis8.chi(4).cast<Complex>();
    CVector c1 = basis8.chi(1).cast<Complex>();
    std::vector<Real> small = {1e-3, 2e-3, 4e-3, 8e-3};
    Real prev0 = std::numeric_limits<Real>::infinity();
    for (auto it = small.rbegin(); it != small.rend(); ++it) {
      const BranchSample* s0 = fam.branch(0).at(*it);
      Real dev = std::abs(c4.cwiseProduct(s0->psi).sum() - Complex(1, 0));
      ck.require(dev < prev0 || dev <= 1e-6, "psi_0 -> chi_4 residual decreases");
      prev0 = dev;
    }
    ck.require(prev0 <= 1e-5, "psi_0 leading term");
    for (int j : {-1, 1}) {
      Real prev = std::numeric_limits<Real>::infinity();
      for (auto it = small.rbegin(); it != small.rend(); ++it) {
        const BranchSample* sj = fam.branch(j).at(*it);
        Real dev = std::abs(c1.cwiseProduct(sj->psi).sum() - Complex(std::sqrt(0.5), 0));
        ck.require(dev < prev || dev <= 1e-6, "psi_{+-1} -> leading term decreases");
        prev = dev;
      }
      ck.require(prev <= 1e-4, "psi_{+-1} leading term");
    }

    auto rows0 = eigenfunction_leading_terms(fam.branch(0), bgk, basis8);
    std::vector<LeadingTermRow> small_rows;
    for (const LeadingTermRow& row : rows0) {
      if (row.s <= 8.1e-3) small_rows.push_back(row);
    }
    Real coeff = fit_quadratic_coefficient(small_rows);
    ck.require(std::abs(coeff + std::sqrt(2.0 / 3.0)) <= 5e-3,
               "(psi_{0,2}, sqrt M) = -sqrt(2/3)");
    ck.note("psi02=" + fmt(coeff));
  });

  return results;
}

}  // namespace vpb
