#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vpb/semigroup.hpp"

using namespace vpb;

TEST_CASE("matrix exponential: identity, diagonal and eigensolve oracle") {
  CMatrix Z = CMatrix::Zero(4, 4);
  CHECK((matrix_exponential(Z) - CMatrix::Identity(4, 4)).norm() <= 1e-14);

  CMatrix D = CMatrix::Zero(3, 3);
  D(0, 0) = Complex(-1.0, 2.0);
  D(1, 1) = Complex(0.0, -3.0);
  D(2, 2) = Complex(-0.25, 0.0);
  CMatrix E = matrix_exponential(D);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(E(i, i) - std::exp(D(i, i))) <= 1e-13);
  }

  std::mt19937_64 rng(7);
  CMatrix A = CMatrix::Random(8, 8);
  A = (A - A.adjoint()).eval();  // skew: well-conditioned eigenbasis
  ModePropagator prop(A);
  CVector f = oracle::random_complex_vector(8, rng);
  CHECK((matrix_exponential(A * Complex(0.8, 0)) * f - prop.apply(f, 0.8)).norm() <=
        1e-11 * f.norm());
}

TEST_CASE("mode propagation: identity at t=0, contraction, micro decay") {
  HermiteBasis b(4);
  CollisionMatrix L = assemble_bgk(1.0, b);
  std::mt19937_64 rng(11);

  for (Real s : {0.05, 0.7, 4.0}) {
    SymbolMatrix sym = assemble_B(L, b, s, Vec3(1, 0, 0), 1.0);
    ModePropagator prop(sym.matrix, s);
    CHECK(prop.reconstruction_error() <= 1e-8);
    CVector f0 = oracle::random_complex_vector(b.dimension(), rng);
    CHECK((prop.apply(f0, 0.0) - f0).norm() == 0.0);

    Real prev = weighted_norm(f0, s);
    for (Real t : {0.3, 1.0, 2.5, 6.0, 15.0}) {
      Real now = weighted_norm(prop.apply(f0, t), s);
      CHECK(now <= prev + 1e-10);
      prev = now;
    }
  }

  // microscopic-only dynamics under Q(xi): ||e^{tQ} f|| <= e^{-mu t} ||f||
  ResolventWorkspace ws(L, b);
  for (Real s : {0.0, 0.4}) {
    CMatrix Q = ws.Lr().cast<Complex>() - kImag * s * ws.Vr().cast<Complex>();
    ModePropagator prop(Q, s);
    CVector g0 = oracle::random_complex_vector(Q.rows(), rng);
    for (Real t : {0.5, 1.0, 3.0}) {
      CHECK(prop.apply(g0, t).norm() <= std::exp(-L.mu * t) * g0.norm() * (1 + 1e-10));
    }
  }
}

TEST_CASE("acoustic group is unitary in the weighted norm") {
  for (Real s : {0.2, 1.0, 5.0}) {
    AcousticMatrix A = assemble_A(s);
    ModePropagator prop(CMatrix(A.matrix), s);
    std::mt19937_64 rng(3);
    CVector f0 = oracle::random_complex_vector(5, rng);
    CVector5 u0 = f0.head<5>();
    Real norm0 = std::sqrt(std::real(weighted_inner5(u0, u0, s)));
    for (Real t : {0.7, 3.0, 11.0}) {
      CVector ft = prop.apply(f0, t);
      CVector5 ut = ft.head<5>();
      Real normt = std::sqrt(std::real(weighted_inner5(ut, ut, s)));
      CHECK(std::abs(normt - norm0) <= 1e-10 * norm0);
    }
  }
}

TEST_CASE("S1/S2 split") {
  HermiteBasis b(4);
  CollisionMatrix L = assemble_bgk(1.0, b);
  std::vector<Real> probe = geometric_grid(1e-3, 0.45, 12);
  BranchFamily fam = continue_branches(L, b, probe, BranchOptions{.build_eigenfunctions = false});
  Real r0 = fam.r0;
  REQUIRE(r0 > 0.05);

  std::mt19937_64 rng(19);
  SUBCASE("consistency, eigenmode capture, projector defect") {
    Real s = 0.05;
    SplitPropagator split = make_split_propagator(L, b, s, r0);
    REQUIRE(split.active);
    CHECK(split.projector_defect() <= 1e-8);

    CVector f0 = oracle::random_complex_vector(b.dimension(), rng);
    for (Real t : {0.0, 0.8, 3.0, 9.0}) {
      CVector total = split.S1(f0, t) + split.S2(f0, t);
      CHECK((total - split.prop.apply(f0, t)).norm() <= 1e-10 * f0.norm());
    }

    // eigenmode initial data: S2 vanishes, S1 is the pure exponential
    CVector psi0 = split.psi[1];  // j = 0 branch
    Complex lam0 = split.lambda[1];
    for (Real t : {0.5, 2.0}) {
      CHECK((split.S1(psi0, t) - std::exp(lam0 * t) * psi0).norm() <= 1e-8);
      CHECK(split.S2(psi0, t).norm() <= 1e-8);
    }
  }

  SUBCASE("S2 decays uniformly across a grid straddling r0") {
    for (Real s : {0.01, 0.3 * r0, 0.9 * r0, 1.5 * r0, 4.0}) {
      SplitPropagator split = make_split_propagator(L, b, s, r0);
      CVector f0 = oracle::random_complex_vector(b.dimension(), rng);
      std::vector<Real> ts, ys;
      for (Real t = 0.0; t <= 8.0; t += 0.5) {
        Real norm = weighted_norm(split.S2(f0, t), s);
        if (norm < 1e-250) break;
        ts.push_back(t);
        ys.push_back(std::log(norm));
      }
      REQUIRE(ts.size() >= 5);
      // least-squares slope in t; sigma_0 = -slope must be positive
      Real tb = 0, yb = 0;
      for (size_t i = 0; i < ts.size(); ++i) {
        tb += ts[i];
        yb += ys[i];
      }
      tb /= ts.size();
      yb /= ys.size();
      Real num = 0, den = 0;
      for (size_t i = 0; i < ts.size(); ++i) {
        num += (ts[i] - tb) * (ys[i] - yb);
        den += (ts[i] - tb) * (ts[i] - tb);
      }
      Real sigma0 = -num / den;
      CHECK(sigma0 > 0.05);
    }
  }
}

TEST_CASE("S1 moment formulas: leading terms and O(s) remainder") {
  HermiteBasis b(4);
  CollisionMatrix L = assemble_bgk(1.0, b);
  std::vector<Real> probe = geometric_grid(1e-3, 0.45, 12);
  Real r0 = continue_branches(L, b, probe, BranchOptions{.build_eigenfunctions = false}).r0;
  InitialDataFamily family{FamilyTag::density_energy, 1.0, 1.0, 0.5};

  std::vector<Real> ts = {0.0, 1.0, 3.0, 7.0, 20.0};
  std::vector<Real> svals = {0.04, 0.02, 0.01, 0.005};
  std::vector<Real> discrepancy;
  for (Real s : svals) {
    SplitPropagator split = make_split_propagator(L, b, s, r0);
    REQUIRE(split.active);
    std::map<int, Complex> lam;
    for (int j = -1; j <= 3; ++j) lam[j] = split.lambda[static_cast<size_t>(j + 1)];
    CVector f0 = family.mode(b, s);
    MomentTriple init = moments_of(f0, b);

    Real worst = 0;
    for (Real t : ts) {
      MomentTriple exact = moments_of(split.S1(f0, t), b);
      MomentTriple lead = s1_leading_moments(lam, init.density, init.momentum,
                                             init.energy, s, t);
      worst = std::max(worst, std::abs(exact.density - lead.density));
      worst = std::max(worst, (exact.momentum - lead.momentum).norm());
      worst = std::max(worst, std::abs(exact.energy - lead.energy));
    }
    discrepancy.push_back(worst);
  }
  // max-over-t discrepancy scales like O(s): fitted log-log slope >= 0.9
  Real slope = std::log(discrepancy.front() / discrepancy.back()) /
               std::log(svals.front() / svals.back());
  CHECK(slope >= 0.9);
  CHECK(discrepancy.front() <= 2.0 * svals.front());

  // microscopic data with zero moments: leading terms vanish identically
  std::map<int, Complex> lam_dummy = {{-1, Complex(0, -1)},
                                      {0, Complex(0, 0)},
                                      {1, Complex(0, 1)},
                                      {2, Complex(-0.1, 0)},
                                      {3, Complex(-0.1, 0)}};
  MomentTriple zero = s1_leading_moments(lam_dummy, Complex(0, 0),
                                         Eigen::Vector3cd::Zero(), Complex(0, 0),
                                         0.05, 2.0);
  CHECK(std::abs(zero.density) == 0.0);
  CHECK(zero.momentum.norm() == 0.0);
  CHECK(std::abs(zero.energy) == 0.0);
}

TEST_CASE("decay-fit reduction") {
  // exact (1+t)^{-3/4} series recovers the exponent to 1e-6
  NormSeries series;
  series.t = time_grid(1.0, 1e4, 120);
  for (Real t : series.t) series.value.push_back(std::pow(1.0 + t, -0.75));
  DecayFit fit = fit_exponent(series, 1e2, 1e4);
  CHECK(fit.exponent == doctest::Approx(-0.75).epsilon(1e-6));
  CHECK(!fit.oscillation_flag);

  // pure exponential input: flagged as non-algebraic on the window
  NormSeries expo;
  expo.t = series.t;
  for (Real t : expo.t) expo.value.push_back(std::exp(-1e-3 * t));
  DecayFit bad = fit_exponent(expo, 1e2, 1e4);
  CHECK(bad.oscillation_flag);

  NormSeries tiny;
  tiny.t = {1.0, 2.0};
  tiny.value = {1.0, 0.5};
  CHECK_THROWS_AS(fit_exponent(tiny, 0.5, 3.0), std::invalid_argument);
}

TEST_CASE("radial reduction is rotation-covariant (spot check)") {
  HermiteBasis b(4);
  CollisionMatrix L = assemble_bgk(1.0, b);
  std::mt19937_64 rng(5);
  std::normal_distribution<Real> dist;
  InitialDataFamily family{FamilyTag::zero_mean_momentum_energy, 1.0, 1.0, 0.5};
  Real s = 0.3, t = 3.7;
  CVector f0 = family.mode(b, s);
  ModePropagator prop1(assemble_B(L, b, s, Vec3(1, 0, 0), 1.0).matrix, s);
  CVector f1 = prop1.apply(f0, t);
  for (int trial = 0; trial < 3; ++trial) {
    Vec3 omega(dist(rng), dist(rng), dist(rng));
    omega.normalize();
    Mat3 O = Eigen::Quaterniond::FromTwoVectors(Vec3(1, 0, 0), omega).toRotationMatrix();
    CMatrix R = b.rotation_matrix(O).cast<Complex>();
    ModePropagator propw(assemble_B(L, b, s, omega, 1.0).matrix, s);
    CVector fw = propw.apply(R * f0, t);
    CHECK((fw - R * f1).norm() <= 1e-9 * f0.norm());
  }
}

TEST_CASE("physical norms: small-scale optimal-rate reproduction") {
  HermiteBasis b(4);
  CollisionMatrix L = assemble_bgk(1.0, b);
  RadialQuadrature quad = RadialQuadrature::log_grid(1e-3, 12.0, 240);
  std::vector<Real> times = time_grid(1.0, 1e4, 160);
  DecayHarnessOptions opts;
  opts.threads = 0;

  std::vector<InitialDataFamily> families = {
      InitialDataFamily{FamilyTag::density_energy, 1.0, 1.0, 0.5},
      InitialDataFamily{FamilyTag::zero_mean_momentum_energy, 1.0, 1.0, 0.5}};
  auto results = assemble_physical_norms(families, L, b, times, quad, opts);

  CHECK(results[0].quadrature_converged);
  CHECK(results[1].quadrature_converged);

  std::map<Observable, Real> expect_de = {
      {Observable::density, -0.75}, {Observable::momentum, -0.25},
      {Observable::energy, -0.75},  {Observable::efield, -0.25},
      {Observable::micro, -0.75},   {Observable::hp_norm, -0.25}};
  std::map<Observable, Real> expect_zm = {
      {Observable::density, -1.25}, {Observable::momentum, -0.75},
      {Observable::energy, -0.75},  {Observable::efield, -0.75},
      {Observable::micro, -1.25},   {Observable::hp_norm, -0.75}};
  for (auto& [obs, target] : expect_de) {
    DecayFit fit = fit_exponent(results[0].series.at(obs), 1e2, 1e4);
    CHECK(std::abs(fit.exponent - target) <= 0.08);
  }
  for (auto& [obs, target] : expect_zm) {
    DecayFit fit = fit_exponent(results[1].series.at(obs), 1e2, 1e4);
    CHECK(std::abs(fit.exponent - target) <= 0.08);
  }
}

TEST_CASE("NSP: transport coefficients feed the fluid rates") {
  HermiteBasis b(4);
  CollisionMatrix L = assemble_bgk(1.0, b);
  CoefficientSet c = vpb_coefficients(L, b);
  CHECK(c.a2 == doctest::Approx(1.0));        // eta
  CHECK(c.a0 == doctest::Approx(5.0 / 3.0));  // alpha

  RadialQuadrature quad = RadialQuadrature::log_grid(1e-3, 12.0, 100);
  std::vector<Real> times = time_grid(1.0, 1e4, 160);

  NspDecayResult g = nsp_decay(c.a2, c.a0, NspFamily::gaussian_density_temperature,
                               times, quad);
  CHECK(g.quadrature_converged);
  CHECK(std::abs(fit_exponent(g.n, 1e2, 1e4).exponent - (-0.75)) <= 0.08);
  CHECK(std::abs(fit_exponent(g.m, 1e2, 1e4).exponent - (-0.25)) <= 0.08);
  CHECK(std::abs(fit_exponent(g.theta, 1e2, 1e4).exponent - (-0.75)) <= 0.08);

  NspDecayResult z = nsp_decay(c.a2, c.a0, NspFamily::zero_density, times, quad);
  CHECK(std::abs(fit_exponent(z.n, 1e2, 1e4).exponent - (-1.25)) <= 0.08);
  CHECK(std::abs(fit_exponent(z.m, 1e2, 1e4).exponent - (-0.75)) <= 0.08);
  CHECK(std::abs(fit_exponent(z.theta, 1e2, 1e4).exponent - (-0.75)) <= 0.08);
}
