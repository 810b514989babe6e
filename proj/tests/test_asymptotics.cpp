#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "vpb/asymptotics.hpp"

using namespace vpb;

namespace {

std::vector<Real> decade_grid() {
  return {1e-3, 1.5e-3, 2e-3, 3e-3, 4.5e-3, 7e-3, 1e-2, 1.5e-2};
}

}  // namespace

TEST_CASE("vpb coefficients: closed-form BGK oracle") {
  HermiteBasis b(4);
  CoefficientSet c = vpb_coefficients(assemble_bgk(1.0, b), b);
  CHECK(c.a0 == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  CHECK(c.a1 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(c.a2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.b1 == doctest::Approx(7.0 / 6.0).epsilon(1e-12));
  CHECK(c.a0 > 0);
  CHECK(c.a1 > 0);
  CHECK(c.a2 > 0);
  CHECK(c.b1 > 0);
  CHECK(std::abs(c.lambda_second[0] - Complex(-10.0 / 3.0, 0)) <= 1e-12);
  CHECK(std::abs(c.lambda_second[1] - Complex(-2.0 / 3.0, 7.0 / 3.0)) <= 1e-12);
  CHECK(std::abs(c.lambda_second[1] - std::conj(c.lambda_second[-1])) <= 1e-14);

  // general nu0 scaling of the shear coefficient
  for (Real nu0 : {0.5, 2.0, 3.7}) {
    CoefficientSet cs = vpb_coefficients(assemble_bgk(nu0, b), b);
    CHECK(cs.a2 == doctest::Approx(1.0 / nu0).epsilon(1e-12));
  }
}

TEST_CASE("boltzmann coefficients: BGK and scaling oracles") {
  HermiteBasis b(4);
  BoltzmannCoefficientSet c = boltzmann_coefficients(assemble_bgk(1.0, b), b);
  // (1/5)(5/3) + (1/2)(4/3) = 1, (3/5)(5/3) = 1
  CHECK(c.a_pm1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.a0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.a2 == doctest::Approx(1.0).epsilon(1e-12));
  for (Real nu0 : {0.5, 2.0}) {
    BoltzmannCoefficientSet cs = boltzmann_coefficients(assemble_bgk(nu0, b), b);
    CHECK(cs.a_pm1 == doctest::Approx(1.0 / nu0).epsilon(1e-12));
    CHECK(cs.a0 == doctest::Approx(1.0 / nu0).epsilon(1e-12));
    CHECK(cs.a2 == doctest::Approx(1.0 / nu0).epsilon(1e-12));
  }
}

TEST_CASE("diagonal model: distinct coefficients from elementary formulas") {
  // For graded rates m_d = base + slope*d the moment decompositions give
  //   a2 = 1/m2, a0 = (5/3)/m3, a1 = (2/3) m2/(1+m2^2),
  //   b1 = (1/2)((4/3)/(1+m2^2) + 5/3),
  //   boltzmann: a_pm1 = (1/3)/m3 + (2/3)/m2, a0 = 1/m3, a2 = 1/m2.
  HermiteBasis b(4);
  Real base = 0.8, slope = 0.2;
  Real m2 = base + 2 * slope, m3 = base + 3 * slope;
  CollisionMatrix L = assemble_spectral_relaxation(
      RelaxationSpectrum::graded(base, slope, b), b);

  CoefficientSet c = vpb_coefficients(L, b);
  CHECK(c.a2 == doctest::Approx(1.0 / m2).epsilon(1e-12));
  CHECK(c.a0 == doctest::Approx(5.0 / 3.0 / m3).epsilon(1e-12));
  CHECK(c.a1 == doctest::Approx(2.0 / 3.0 * m2 / (1 + m2 * m2)).epsilon(1e-12));
  CHECK(c.b1 == doctest::Approx(0.5 * (4.0 / 3.0 / (1 + m2 * m2) + 5.0 / 3.0)).epsilon(1e-12));

  BoltzmannCoefficientSet cb = boltzmann_coefficients(L, b);
  CHECK(cb.a_pm1 == doctest::Approx(1.0 / 3.0 / m3 + 2.0 / 3.0 / m2).epsilon(1e-12));
  CHECK(cb.a0 == doctest::Approx(1.0 / m3).epsilon(1e-12));
  CHECK(cb.a2 == doctest::Approx(1.0 / m2).epsilon(1e-12));
  // generically distinct
  CHECK(std::abs(cb.a_pm1 - cb.a0) > 1e-3);
  CHECK(std::abs(cb.a0 - cb.a2) > 1e-3);
  // shear coefficient shared between the two expansions
  CHECK(cb.a2 == doctest::Approx(c.a2).epsilon(1e-14));
}

TEST_CASE("formula redundancy: both lambda''(0) routes agree") {
  HermiteBasis b(4);
  for (auto L : {assemble_bgk(1.0, b),
                 assemble_spectral_relaxation(RelaxationSpectrum::graded(0.8, 0.2, b), b)}) {
    CoefficientSet c = vpb_coefficients(L, b);
    for (int j : {-1, 0, 1, 2}) {
      Complex alt = lambda_second_alt(L, b, j);
      CHECK(std::abs(alt - c.lambda_second[j]) <= 1e-10);
    }
    CHECK(std::abs(lambda_second_alt(L, b, 1) - std::conj(lambda_second_alt(L, b, -1))) <=
          1e-12);
  }
}

TEST_CASE("finite-difference lambda''(0) from branch data within 1%") {
  HermiteBasis b(4);
  CollisionMatrix L = assemble_bgk(1.0, b);
  CoefficientSet c = vpb_coefficients(L, b);
  BranchFamily fam = continue_branches(L, b, decade_grid());
  for (int j = -1; j <= 3; ++j) {
    const BranchSample* s1 = fam.branch(j).at(1e-3);
    const BranchSample* s2 = fam.branch(j).at(2e-3);
    REQUIRE(s1);
    REQUIRE(s2);
    Complex fd = lambda_second_fd(s1->lambda, s2->lambda, 1e-3,
                                  Complex(0, j == 2 || j == 3 ? 0 : j), Complex(0, 0),
                                  /*even_in_s=*/true);
    CHECK(std::abs(fd - c.lambda_second[j]) <= 0.01 * std::abs(c.lambda_second[j]));
  }
}

TEST_CASE("expansion validation: monotone remainder ratios") {
  HermiteBasis b(4);
  CollisionMatrix L = assemble_bgk(1.0, b);
  CoefficientSet c = vpb_coefficients(L, b);
  BranchFamily fam = continue_branches(L, b, decade_grid());

  for (int j = -1; j <= 3; ++j) {
    Complex intercept(0, j == 2 || j == 3 ? 0 : j);
    ExpansionReport rep =
        validate_expansion(fam.branch(j), intercept, Complex(0, 0), c.lambda_second[j]);
    CHECK(rep.ratio_monotone);
    CHECK(rep.decay_power >= 0.9);  // at least one extra power of s
  }

  // |lambda_1(s) - i| <= 2 sqrt(a1^2 + b1^2) s^2 for small s
  Real bound_coeff = 2.0 * std::sqrt(c.a1 * c.a1 + c.b1 * c.b1);
  for (const BranchSample& sample : fam.branch(1).samples) {
    CHECK(std::abs(sample.lambda - Complex(0, 1)) <= bound_coeff * sample.s * sample.s);
  }

  CHECK_THROWS_AS(
      validate_expansion(Branch{.j = 0, .samples = {}}, Complex(0, 0), Complex(0, 0),
                         Complex(0, 0)),
      std::invalid_argument);
}

TEST_CASE("boltzmann branches: acoustic slope and expansion") {
  HermiteBasis b(4);
  CollisionMatrix L = assemble_bgk(1.0, b);
  BoltzmannCoefficientSet c = boltzmann_coefficients(L, b);
  BranchOptions opts;
  opts.variant = SymbolVariant::boltzmann;
  BranchFamily fam = continue_branches(L, b, decade_grid(), opts);

  Real acoustic = std::sqrt(5.0 / 3.0);
  const BranchSample* tiny = fam.branch(1).at(1e-3);
  REQUIRE(tiny);
  CHECK(std::abs(std::imag(tiny->lambda) / 1e-3 - acoustic) <= 1e-3);

  // The acoustic pair has an O(s^3) remainder; below s ~ 2e-3 the tiny
  // determinant derivative (~s^2) floors the root accuracy near 1e-9, so
  // the monotone-ratio audit runs on the decade above that.
  std::vector<Real> grid = {2e-3, 3e-3, 4.5e-3, 7e-3, 1e-2, 1.5e-2, 2.2e-2};
  BranchFamily fam2 = continue_branches(L, b, grid, opts);
  for (int j : {-1, 1}) {
    ExpansionReport rep = validate_expansion(fam2.branch(j), Complex(0, 0),
                                             Complex(0, j * acoustic),
                                             Complex(-2.0 * c.a_pm1, 0));
    CHECK(rep.ratio_monotone);
  }
  ExpansionReport rep0 = validate_expansion(fam2.branch(0), Complex(0, 0), Complex(0, 0),
                                            Complex(-2.0 * c.a0, 0));
  CHECK(rep0.ratio_monotone);
}

TEST_CASE("euler-poisson eigenvectors") {
  std::mt19937_64 rng(2);
  std::normal_distribution<Real> dist;
  for (Real s : {0.1, 0.7, 2.0}) {
    Vec3 omega(dist(rng), dist(rng), dist(rng));
    omega.normalize();
    auto psis = euler_poisson_eigenvectors(s, omega);
    CMatrix5 A = acoustic_matrix(s, omega, 1.0);

    // weighted orthonormality
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        Complex g = weighted_inner5(psis[i], psis[j], s);
        CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) <= 1e-12);
      }
    }
    // eigenvector residuals against the direct 5x5 action
    Real alpha = std::sqrt(1.0 + 5.0 / 3.0 * s * s);
    Complex evs[5] = {Complex(0, -alpha), Complex(0, 0), Complex(0, alpha),
                      Complex(0, 0), Complex(0, 0)};
    for (int k = 0; k < 5; ++k) {
      CHECK((A * psis[k] - evs[k] * psis[k]).norm() <= 1e-12);
    }
  }
  // s -> 0: psi_0 density component vanishes, energy component -> 1
  auto near0 = euler_poisson_eigenvectors(1e-4, Vec3(1, 0, 0));
  CHECK(std::abs(near0[1][0]) <= 1e-7);
  CHECK(std::abs(near0[1][4] - Complex(1, 0)) <= 1e-7);
}

TEST_CASE("eigenfunction leading terms against the paper table") {
  HermiteBasis b(5);
  CollisionMatrix L = assemble_bgk(1.0, b);
  BranchFamily fam = continue_branches(L, b, decade_grid());

  for (int j = -1; j <= 3; ++j) {
    auto rows = eigenfunction_leading_terms(fam.branch(j), L, b);
    REQUIRE(rows.size() >= 3);
    // overlap with psi_{j,0} approaches 1 from the small-s side
    CHECK(std::abs(rows.front().overlap - 1.0) <= 1e-4);
    CHECK(std::abs(rows.front().overlap - 1.0) < std::abs(rows.back().overlap - 1.0));
    // ||psi(s) - psi_j0 - s psi_j1|| = O(s^2): the scaled column stays bounded
    Real lo = 1e300, hi = 0;
    for (const auto& row : rows) {
      lo = std::min(lo, row.first_order);
      hi = std::max(hi, row.first_order);
    }
    CHECK(hi < 10.0);
    CHECK(hi / std::max(lo, 1e-12) < 50.0);
  }

  // (psi_{0,2}, sqrt M) = -sqrt(2/3) from the quadratic fit of the chi_0
  // coefficient of psi_0(s)
  auto rows0 = eigenfunction_leading_terms(fam.branch(0), L, b);
  Real coeff = fit_quadratic_coefficient(rows0);
  CHECK(coeff == doctest::Approx(-std::sqrt(2.0 / 3.0)).epsilon(2e-3));

  // psi_{+-1,2} has no sqrt(M) component: the chi_0 coefficient of
  // psi_{+-1}(s) - s psi_{+-1,1} is o(s^2)
  for (int j : {-1, 1}) {
    auto rows1 = eigenfunction_leading_terms(fam.branch(j), L, b);
    Real resid = std::abs(std::real(rows1.front().chi0_coeff) -
                          (-j) * std::sqrt(0.5) * rows1.front().s);
    CHECK(resid <= 10.0 * rows1.front().s * rows1.front().s * rows1.front().s);
  }
}
