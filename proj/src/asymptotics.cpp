#include "vpb/asymptotics.hpp"

#include <cmath>

namespace vpb {

namespace {

constexpr Real kSqrt23 = 0.816496580927726;  // sqrt(2/3)

Complex moment_inner(const CVector& x, const Vector& w) {
  Complex acc = 0;
  for (int i = 0; i < x.size(); ++i) acc += x[i] * w[i];
  return acc;
}

}  // namespace

CoefficientSet vpb_coefficients(const CollisionMatrix& L, const HermiteBasis& basis) {
  MicroSpace micro(basis);
  ProjectionSet ps = projections(basis);
  const Matrix& V1 = basis.axis_multiplication(0);
  Vector w1 = V1 * basis.chi(1);
  Vector w2 = V1 * basis.chi(2);
  Vector w4 = V1 * basis.chi(4);

  CVector g4 = solve_micro(L, micro, Complex(0, 0), (ps.P1 * w4).cast<Complex>());
  CVector g2 = solve_micro(L, micro, Complex(0, 0), (ps.P1 * w2).cast<Complex>());
  // (L + i P1)^{-1} P1 (v1 chi_1): shift -i in (L - shift P1)
  CVector g = solve_micro(L, micro, Complex(0, -1), (ps.P1 * w1).cast<Complex>());

  CoefficientSet out;
  out.a0 = -std::real(moment_inner(g4, w4));
  out.a2 = -std::real(moment_inner(g2, w2));
  // a1 = -1/2 (L g, g) with conjugation on the second slot
  CVector Lg = L.matrix.cast<Complex>() * g;
  out.a1 = -0.5 * std::real(g.dot(Lg));
  out.b1 = 0.5 * (g.squaredNorm() + 5.0 / 3.0);

  out.lambda_second[0] = Complex(-2.0 * out.a0, 0);
  out.lambda_second[1] = Complex(-2.0 * out.a1, 2.0 * out.b1);
  out.lambda_second[-1] = std::conj(out.lambda_second[1]);
  out.lambda_second[2] = Complex(-2.0 * out.a2, 0);
  out.lambda_second[3] = out.lambda_second[2];
  return out;
}

BoltzmannCoefficientSet boltzmann_coefficients(const CollisionMatrix& L,
                                               const HermiteBasis& basis) {
  MicroSpace micro(basis);
  ProjectionSet ps = projections(basis);
  const Matrix& V1 = basis.axis_multiplication(0);
  Vector w1 = V1 * basis.chi(1);
  Vector w2 = V1 * basis.chi(2);
  Vector w4 = V1 * basis.chi(4);

  CVector g4 = solve_micro(L, micro, Complex(0, 0), (ps.P1 * w4).cast<Complex>());
  CVector g2 = solve_micro(L, micro, Complex(0, 0), (ps.P1 * w2).cast<Complex>());
  CVector g1 = solve_micro(L, micro, Complex(0, 0), (ps.P1 * w1).cast<Complex>());

  Real m44 = std::real(moment_inner(g4, w4));
  Real m11 = std::real(moment_inner(g1, w1));
  Real m22 = std::real(moment_inner(g2, w2));

  BoltzmannCoefficientSet out;
  out.a_pm1 = -0.2 * m44 - 0.5 * m11;
  out.a0 = -0.6 * m44;
  out.a2 = -m22;
  return out;
}

Complex lambda_second_alt(const CollisionMatrix& L, const HermiteBasis& basis, int j) {
  MicroSpace micro(basis);
  ProjectionSet ps = projections(basis);
  const Matrix& V1 = basis.axis_multiplication(0);
  if (j == 0) {
    Vector w4 = V1 * basis.chi(4);
    CVector g4 = solve_micro(L, micro, Complex(0, 0), (ps.P1 * w4).cast<Complex>());
    return 2.0 * moment_inner(g4, w4);
  }
  if (j == 2 || j == 3) {
    Vector w2 = V1 * basis.chi(2);
    CVector g2 = solve_micro(L, micro, Complex(0, 0), (ps.P1 * w2).cast<Complex>());
    return 2.0 * moment_inner(g2, w2);
  }
  if (j == 1 || j == -1) {
    // lambda_{+-1}''(0) = ((L -+ i P1)^{-1} P1(v1 chi_1), v1 chi_1) +- (5/3) i
    Vector w1 = V1 * basis.chi(1);
    CVector g = solve_micro(L, micro, Complex(0, j), (ps.P1 * w1).cast<Complex>());
    return moment_inner(g, w1) + Complex(0, j * 5.0 / 3.0);
  }
  throw std::invalid_argument("branch index must be in {-1,0,1,2,3}");
}

Complex lambda_second_fd(Complex lambda_h, Complex lambda_2h, Real h,
                         Complex intercept, Complex slope, bool even_in_s) {
  Complex a_h = 2.0 * (lambda_h - intercept - slope * h) / (h * h);
  Complex a_2h = 2.0 * (lambda_2h - intercept - slope * (2.0 * h)) / (4.0 * h * h);
  if (even_in_s) {
    return (4.0 * a_h - a_2h) / 3.0;  // error O(h^4)
  }
  return 2.0 * a_h - a_2h;  // cancels the s^3 term, error O(h^2)
}

ExpansionReport validate_expansion(const Branch& branch, Complex intercept,
                                   Complex slope, Complex lambda_second) {
  ExpansionReport rep;
  rep.j = branch.j;
  rep.intercept = intercept;
  rep.slope = slope;
  rep.half_second = 0.5 * lambda_second;
  if (branch.samples.size() < 6) {
    throw std::invalid_argument("expansion validation needs at least 6 branch samples");
  }
  Real s_lo = branch.samples.front().s, s_hi = branch.samples.front().s;
  for (const BranchSample& sample : branch.samples) {
    s_lo = std::min(s_lo, sample.s);
    s_hi = std::max(s_hi, sample.s);
  }
  if (s_hi < 10.0 * s_lo) {
    throw std::invalid_argument("expansion validation needs a decade of s values");
  }
  for (auto it = branch.samples.rbegin(); it != branch.samples.rend(); ++it) {
    ExpansionRow row;
    row.s = it->s;
    Complex model = intercept + slope * it->s + rep.half_second * (it->s * it->s);
    row.remainder = std::abs(it->lambda - model);
    row.ratio = row.remainder / (it->s * it->s);
    rep.rows.push_back(row);
  }
  rep.ratio_monotone = true;
  for (size_t i = 1; i < rep.rows.size(); ++i) {
    if (rep.rows[i].ratio >= rep.rows[i - 1].ratio) rep.ratio_monotone = false;
  }
  // fitted extra power of s from the extreme rows
  const ExpansionRow& big = rep.rows.front();
  const ExpansionRow& small = rep.rows.back();
  if (small.ratio > 0 && big.ratio > 0) {
    rep.decay_power = std::log(big.ratio / small.ratio) / std::log(big.s / small.s);
  }
  return rep;
}

std::array<CVector5, 5> euler_poisson_eigenvectors(Real s, const Vec3& omega) {
  if (!(s > 0)) throw std::invalid_argument("Euler-Poisson eigenvectors need s > 0");
  if (std::abs(omega.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("direction omega must have unit norm");
  }
  const Real root = std::sqrt(1.0 + 5.0 / 3.0 * s * s);
  const Real c = std::sqrt(0.5);
  std::array<CVector5, 5> out;

  // j = 0: kernel vector with zero momentum. The density component sign is
  // fixed by A(xi) psi = 0, i.e. (1 + 1/s^2) n + sqrt(2/3) q = 0.
  CVector5 psi0 = CVector5::Zero();
  psi0[0] = -kSqrt23 * s * s / (root * std::sqrt(1.0 + s * s));
  psi0[4] = std::sqrt(s * s + 1.0) / root;
  out[1] = psi0;

  for (int sign : {+1, -1}) {
    CVector5 psi = CVector5::Zero();
    psi[0] = c * s / root;
    for (int i = 0; i < 3; ++i) psi[1 + i] = -c * sign * omega[i];
    psi[4] = c * kSqrt23 * s / root;
    out[sign > 0 ? 2 : 0] = psi;
  }

  Vec3 w2 = omega.unitOrthogonal();
  Vec3 w3 = omega.cross(w2);
  CVector5 psi2 = CVector5::Zero(), psi3 = CVector5::Zero();
  for (int i = 0; i < 3; ++i) {
    psi2[1 + i] = w2[i];
    psi3[1 + i] = w3[i];
  }
  out[3] = psi2;
  out[4] = psi3;
  return out;
}

Complex weighted_inner5(const CVector5& u, const CVector5& v, Real s) {
  return v.dot(u) + u[0] * std::conj(v[0]) / (s * s);
}

std::vector<LeadingTermRow> eigenfunction_leading_terms(const Branch& branch,
                                                        const CollisionMatrix& L,
                                                        const HermiteBasis& basis) {
  if (branch.samples.size() < 3) {
    throw std::invalid_argument("leading-term comparison needs >= 3 samples");
  }
  MicroSpace micro(basis);
  ProjectionSet ps = projections(basis);
  const Matrix& V1 = basis.axis_multiplication(0);
  const int j = branch.j;

  // paper-table leading terms psi_{j,0} and psi_{j,1} at omega = e1
  CVector psi_j0, psi_j1;
  switch (j) {
    case 0: {
      psi_j0 = basis.chi(4).cast<Complex>();
      Vector w4 = V1 * basis.chi(4);
      psi_j1 = kImag * solve_micro(L, micro, Complex(0, 0), (ps.P1 * w4).cast<Complex>());
      break;
    }
    case 2:
    case 3: {
      psi_j0 = basis.chi(j).cast<Complex>();
      Vector wj = V1 * basis.chi(j);
      psi_j1 = kImag * solve_micro(L, micro, Complex(0, 0), (ps.P1 * wj).cast<Complex>());
      break;
    }
    case 1:
    case -1: {
      psi_j0 = std::sqrt(0.5) * basis.chi(1).cast<Complex>();
      Vector w1 = V1 * basis.chi(1);  // (v.omega)^2 sqrt(M)
      CVector g = solve_micro(L, micro, Complex(0, j), (ps.P1 * w1).cast<Complex>());
      psi_j1 = -static_cast<Real>(j) * std::sqrt(0.5) * basis.chi(0).cast<Complex>() -
               static_cast<Real>(j) * (std::sqrt(3.0) / 3.0) * basis.chi(4).cast<Complex>() +
               std::sqrt(0.5) * kImag * g;
      break;
    }
    default:
      throw std::invalid_argument("branch index must be in {-1,0,1,2,3}");
  }

  std::vector<LeadingTermRow> rows;
  CVector c0 = basis.chi(0).cast<Complex>();
  Real n0sq = psi_j0.squaredNorm();
  for (const BranchSample& sample : branch.samples) {
    if (sample.psi.size() == 0) continue;
    LeadingTermRow row;
    row.s = sample.s;
    row.overlap = std::abs(psi_j0.dot(sample.psi)) / n0sq;
    row.first_order = (sample.psi - psi_j0 - sample.s * psi_j1).norm() / (sample.s * sample.s);
    row.chi0_coeff = c0.dot(sample.psi);
    rows.push_back(row);
  }
  return rows;
}

BranchFamily probe_branch_family(const CollisionMatrix& L, const HermiteBasis& basis,
                                 Real s_min, int n, bool eigenfunctions) {
  CoefficientSet c = vpb_coefficients(L, basis);
  Real a_max = std::max({c.a0, c.a1, c.a2});
  Real s_exit = std::sqrt(L.mu / (2.0 * a_max));
  BranchOptions opts;
  opts.build_eigenfunctions = eigenfunctions;
  return continue_branches(L, basis, geometric_grid(s_min, 1.5 * s_exit, n), opts);
}

Real fit_quadratic_coefficient(const std::vector<LeadingTermRow>& rows) {
  // least squares of Re(chi0_coeff) = c * s^2
  Real num = 0, den = 0;
  for (const LeadingTermRow& row : rows) {
    Real s2 = row.s * row.s;
    num += std::real(row.chi0_coeff) * s2;
    den += s2 * s2;
  }
  if (den == 0) throw std::invalid_argument("quadratic fit needs nonzero s values");
  return num / den;
}

}  // namespace vpb
