#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "vpb/collision.hpp"

using namespace vpb;

namespace {

Vector micro_random(const HermiteBasis& b, std::mt19937_64& rng) {
  ProjectionSet ps = projections(b);
  Vector f = oracle::random_real_vector(b.dimension(), rng);
  return ps.P1 * f;
}

/// Brute-force 2*pi*E|v - X| by tensor quadrature, X ~ N(0,I3). The |.|
/// kink limits this route to ~1e-3 relative accuracy.
Real collision_frequency_oracle_3d(Real r) {
  Quadrature1d q = gauss_hermite_prob(40);
  Vec3 v(r, 0, 0);
  Real acc = 0;
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 40; ++j)
      for (int k = 0; k < 40; ++k) {
        Vec3 w(q.nodes[i], q.nodes[j], q.nodes[k]);
        acc += q.weights[i] * q.weights[j] * q.weights[k] * (v - w).norm();
      }
  return 2.0 * M_PI * acc;
}

/// High-accuracy oracle via the noncentral-chi radial density:
/// |X - v| has density rho/(r sqrt(2 pi)) (e^{-(rho-r)^2/2} - e^{-(rho+r)^2/2}).
Real collision_frequency_oracle_radial(Real r) {
  REQUIRE(r > 0);
  auto integrand = [r](Real rho) {
    return rho * rho / (r * std::sqrt(2.0 * M_PI)) *
           (std::exp(-0.5 * (rho - r) * (rho - r)) - std::exp(-0.5 * (rho + r) * (rho + r)));
  };
  // composite Simpson on [0, r+14]
  int n = 20000;
  Real a = 0.0, b = r + 14.0, h = (b - a) / n;
  Real acc = integrand(a) + integrand(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * integrand(a + i * h);
  return 2.0 * M_PI * acc * h / 3.0;
}

}  // namespace

TEST_CASE("bgk: kernel, scalar relaxation, measured gap") {
  HermiteBasis b(4);
  CollisionMatrix L = assemble_bgk(1.0, b);

  for (int j = 0; j <= 4; ++j) CHECK((L.matrix * b.chi(j)).norm() <= 1e-13);

  // v1 v2 sqrt(M) is microscopic by parity, so it relaxes at rate nu0
  Vector f = b.project_polynomial([](const Vec3& v) { return v[0] * v[1]; });
  CHECK((L.matrix * f + 1.0 * f).norm() <= 1e-12);

  // smallest nonzero |eigenvalue| equals nu0 (dense symmetric eigensolve)
  Eigen::SelfAdjointEigenSolver<Matrix> es(-L.matrix);
  Real smallest_nonzero = 1e300;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    Real ev = es.eigenvalues()[i];
    if (ev > 1e-10) smallest_nonzero = std::min(smallest_nonzero, ev);
  }
  CHECK(smallest_nonzero == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(L.mu == doctest::Approx(1.0));

  CHECK_THROWS_AS(assemble_bgk(0.0, b), std::invalid_argument);
}

TEST_CASE("spectral relaxation: reduction to bgk and measured mu") {
  HermiteBasis b(4);
  RelaxationSpectrum uniform = RelaxationSpectrum::graded(1.0, 0.0, b);
  CollisionMatrix Ls = assemble_spectral_relaxation(uniform, b);
  CollisionMatrix Lb = assemble_bgk(1.0, b);
  CHECK((Ls.matrix - Lb.matrix).cwiseAbs().maxCoeff() <= 1e-13);

  RelaxationSpectrum graded = RelaxationSpectrum::graded(0.8, 0.2, b);
  CollisionMatrix Lg = assemble_spectral_relaxation(graded, b);
  for (int j = 0; j <= 4; ++j) CHECK((Lg.matrix * b.chi(j)).norm() <= 1e-13);

  // mu equals the smallest rate (eigensolve oracle)
  Eigen::SelfAdjointEigenSolver<Matrix> es(-Lg.matrix);
  Real min_rate = 1e300;
  for (auto& [k, rate] : graded.rates) min_rate = std::min(min_rate, rate);
  Real smallest_nonzero = 1e300;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()[i] > 1e-10) {
      smallest_nonzero = std::min(smallest_nonzero, es.eigenvalues()[i]);
    }
  }
  CHECK(Lg.mu == doctest::Approx(min_rate).epsilon(1e-12));
  CHECK(smallest_nonzero == doctest::Approx(min_rate).epsilon(1e-12));

  // coercivity as a quadratic form on random microscopic vectors
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Vector f = micro_random(b, rng);
    CHECK(f.dot(Lg.matrix * f) <= -Lg.mu * f.squaredNorm() + 1e-10);
  }

  RelaxationSpectrum missing = graded;
  missing.rates.erase(MultiIndex{1, 1, 0});
  CHECK_THROWS_AS(assemble_spectral_relaxation(missing, b), std::invalid_argument);

  RelaxationSpectrum skewed = graded;
  skewed.rates[MultiIndex{2, 0, 0}] = 3.0;
  CHECK_THROWS_AS(assemble_spectral_relaxation(skewed, b), std::invalid_argument);

  RelaxationSpectrum invariant_rate = graded;
  invariant_rate.rates[MultiIndex{0, 0, 0}] = 1.0;
  CHECK_THROWS_AS(assemble_spectral_relaxation(invariant_rate, b), std::invalid_argument);
}

TEST_CASE("hard-sphere collision frequency closed form") {
  // closed form against two independent oracles
  for (Real r : {0.0, 0.5, 1.0, 2.0}) {
    CHECK(hard_sphere_collision_frequency(r) ==
          doctest::Approx(collision_frequency_oracle_3d(r)).epsilon(2e-3));
  }
  for (Real r : {0.5, 1.0, 2.0}) {
    CHECK(hard_sphere_collision_frequency(r) ==
          doctest::Approx(collision_frequency_oracle_radial(r)).epsilon(1e-10));
  }
  // r = 0: 2 pi times the chi(3) mean 2 sqrt(2/pi)
  CHECK(hard_sphere_collision_frequency(0.0) ==
        doctest::Approx(2.0 * M_PI * 2.0 * std::sqrt(2.0 / M_PI)).epsilon(1e-12));
  // increasing in |v| and linearly bounded: c1 (1+r) <= nu <= c2 (1+r)
  Real nu0 = hard_sphere_collision_frequency(0.0);
  Real nu1 = hard_sphere_collision_frequency(1.0);
  Real nu2 = hard_sphere_collision_frequency(2.0);
  CHECK(nu0 < nu1);
  CHECK(nu1 < nu2);
  Real c1 = 1e300, c2 = 0;
  for (Real r : {0.0, 1.0, 2.0}) {
    Real ratio = hard_sphere_collision_frequency(r) / (1.0 + r);
    c1 = std::min(c1, ratio);
    c2 = std::max(c2, ratio);
  }
  CHECK(c1 > 0);
  for (Real r = 0.0; r <= 5.0; r += 0.25) {
    Real nu = hard_sphere_collision_frequency(r);
    CHECK(nu >= 0.99 * c1 * (1.0 + r));
    CHECK(nu <= 1.01 * c2 * (1.0 + r));
  }
}

TEST_CASE("hard-sphere assembly: structure and quadrature refinement") {
  HermiteBasis b(4);
  HardSphereQuadrature coarse{6, 0, 0};
  HardSphereQuadrature fine{12, 0, 0};
  CollisionMatrix Lc = assemble_hard_sphere(b, coarse);
  CollisionMatrix Lf = assemble_hard_sphere(b, fine);

  // exact symmetry and kernel after the fix-up, defects reported before it
  CHECK((Lc.matrix - Lc.matrix.transpose()).norm() / Lc.matrix.norm() <= 1e-14);
  for (int j = 0; j <= 4; ++j) CHECK((Lc.matrix * b.chi(j)).norm() <= 1e-12);
  CHECK(Lc.kernel_defect.maxCoeff() > 0);
  CHECK(Lc.symmetry_defect <= 5e-2);
  CHECK(Lf.symmetry_defect < Lc.symmetry_defect);

  // kernel defect decreases when velocity nodes double
  for (int j = 0; j <= 4; ++j) {
    CHECK(Lf.kernel_defect[j] < Lc.kernel_defect[j]);
  }
  CHECK(Lc.kernel_defect[0] <= 1e-2 * Lc.matrix.norm());

  // dissipativity on the microscopic subspace
  CHECK(Lf.mu > 0);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Vector f = micro_random(b, rng);
    CHECK(f.dot(Lf.matrix * f) <= -Lf.mu * f.squaredNorm() + 1e-8 * f.squaredNorm());
  }

  // matrix entries converge as nodes double (refinement oracle)
  CollisionMatrix Lm = assemble_hard_sphere(b, HardSphereQuadrature{8, 0, 0});
  Real d_coarse = (Lm.matrix - Lf.matrix).norm();
  Real d_finer = (assemble_hard_sphere(b, HardSphereQuadrature{10, 0, 0}).matrix -
                  Lf.matrix).norm();
  CHECK(d_finer < d_coarse);

  // rotation invariance within quadrature tolerance
  Mat3 O = oracle::rotation_about(Vec3(0.3, -1.0, 0.7), 1.1);
  Matrix R = b.rotation_matrix(O);
  Real rel = (R.transpose() * Lf.matrix * R - Lf.matrix).norm() / Lf.matrix.norm();
  CHECK(rel <= 5e-2);

  // budget guard
  HardSphereQuadrature huge{12, 0, 0};
  huge.max_node_ops = 1e3;
  CHECK_THROWS_AS(assemble_hard_sphere(b, huge), numerical_error);
}

TEST_CASE("hard-sphere cache round-trip") {
  HermiteBasis b(3);
  HardSphereQuadrature quad{6, 0, 0};
  auto dir = std::filesystem::temp_directory_path() / "vpb_cache_test";
  std::filesystem::remove_all(dir);
  CollisionMatrix fresh = assemble_hard_sphere_cached(b, quad, dir.string());
  CollisionMatrix cached = assemble_hard_sphere_cached(b, quad, dir.string());
  CHECK((fresh.matrix - cached.matrix).cwiseAbs().maxCoeff() == 0.0);
  CHECK(cached.mu == doctest::Approx(fresh.mu));
  std::filesystem::remove_all(dir);
}

TEST_CASE("solve_micro: scalar relaxation oracles and contracts") {
  HermiteBasis b(4);
  MicroSpace micro(b);
  CollisionMatrix L = assemble_bgk(1.0, b);

  Vector f = b.project_polynomial([](const Vec3& v) { return v[0] * v[1]; });
  CVector fc = f.cast<Complex>();

  // lambda = 0: L x = rhs gives x = -rhs/nu0
  CVector x0 = solve_micro(L, micro, Complex(0, 0), fc);
  CHECK((x0 + fc).norm() <= 1e-12);

  // lambda = -i: (L + i P1) x = rhs gives x = rhs/(-nu0 + i)
  CVector xi = solve_micro(L, micro, Complex(0, -1), fc);
  CHECK((xi - fc / Complex(-1.0, 1.0)).norm() <= 1e-12);

  // solver contract on random microscopic rhs
  std::mt19937_64 rng(5);
  ProjectionSet ps = projections(b);
  for (int trial = 0; trial < 10; ++trial) {
    CVector rhs = oracle::random_complex_vector(b.dimension(), rng);
    rhs = ps.P1.cast<Complex>() * rhs;
    Complex shift(0.3, -0.8);
    CVector x = solve_micro(L, micro, shift, rhs);
    CVector resid = L.matrix.cast<Complex>() * x - shift * x - rhs;
    CHECK(resid.norm() <= 1e-10 * (1.0 + rhs.norm()));
    // solution stays microscopic
    CHECK((ps.P0.cast<Complex>() * x).norm() <= 1e-12);
  }

  // macroscopic rhs is rejected
  CVector bad = b.chi(0).cast<Complex>();
  CHECK_THROWS_AS(solve_micro(L, micro, Complex(0, 0), bad), std::invalid_argument);
}
