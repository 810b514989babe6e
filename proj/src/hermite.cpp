#include "vpb/hermite.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace vpb {

Quadrature1d gauss_hermite_prob(int n) {
  if (n < 1) throw std::invalid_argument("quadrature needs at least one node");
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite family:
  // zero diagonal, off-diagonal sqrt(k).
  Matrix J = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<Real>(k));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(J);
  Quadrature1d q;
  q.nodes = es.eigenvalues();
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    Real v0 = es.eigenvectors()(0, i);
    q.weights[i] = v0 * v0;  // total mass of N(0,1) is 1
  }
  return q;
}

namespace {

std::vector<MultiIndex> graded_lex_indices(int K) {
  std::vector<MultiIndex> out;
  for (int d = 0; d <= K; ++d) {
    for (int k1 = 0; k1 <= d; ++k1) {
      for (int k2 = 0; k2 <= d - k1; ++k2) {
        out.push_back({k1, k2, d - k1 - k2});
      }
    }
  }
  return out;
}

}  // namespace

HermiteBasis::HermiteBasis(int max_total_degree, int nodes_per_axis)
    : degree_(max_total_degree) {
  if (degree_ < 0) throw std::invalid_argument("basis degree must be nonnegative");
  if (degree_ > kDegreeCap) {
    throw std::invalid_argument("basis degree exceeds the configured cap of 12");
  }
  index_map_ = graded_lex_indices(degree_);
  for (int a = 0; a < static_cast<int>(index_map_.size()); ++a) {
    position_[index_map_[a]] = a;
  }
  int n = nodes_per_axis > 0 ? nodes_per_axis : degree_ + 2;
  quad_ = gauss_hermite_prob(n);

  // 1-D multiplication matrix by quadrature, then tensor placement.
  int m = degree_ + 1;
  Matrix T = Matrix::Zero(m, m);
  Vector h(m);
  for (int i = 0; i < n; ++i) {
    hermite_values(quad_.nodes[i], h);
    T += quad_.weights[i] * quad_.nodes[i] * (h * h.transpose());
  }
  int dim = dimension();
  for (int axis = 0; axis < 3; ++axis) {
    vmul_[axis] = Matrix::Zero(dim, dim);
    for (int a = 0; a < dim; ++a) {
      MultiIndex k = index_map_[a];
      for (int delta : {-1, +1}) {
        MultiIndex kb = k;
        kb[axis] += delta;
        int b = index_of(kb);
        if (b >= 0) vmul_[axis](a, b) = T(k[axis], kb[axis]);
      }
    }
  }
}

int HermiteBasis::index_of(const MultiIndex& k) const {
  auto it = position_.find(k);
  return it == position_.end() ? -1 : it->second;
}

void HermiteBasis::hermite_values(Real x, Vector& out) const {
  int m = degree_ + 1;
  out.resize(m);
  out[0] = 1.0;
  if (m > 1) out[1] = x;
  for (int k = 1; k + 1 < m; ++k) {
    out[k + 1] = (x * out[k] - std::sqrt(static_cast<Real>(k)) * out[k - 1]) /
                 std::sqrt(static_cast<Real>(k + 1));
  }
}

Vector HermiteBasis::evaluate_all(const Vec3& v) const {
  Vector hx, hy, hz;
  hermite_values(v[0], hx);
  hermite_values(v[1], hy);
  hermite_values(v[2], hz);
  Vector out(dimension());
  for (int a = 0; a < dimension(); ++a) {
    const MultiIndex& k = index_map_[a];
    out[a] = hx[k[0]] * hy[k[1]] * hz[k[2]];
  }
  return out;
}

Vector HermiteBasis::project_polynomial(
    const std::function<Real(const Vec3&)>& p) const {
  int n = quad_.nodes.size();
  Vector out = Vector::Zero(dimension());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        Vec3 v(quad_.nodes[i], quad_.nodes[j], quad_.nodes[k]);
        Real w = quad_.weights[i] * quad_.weights[j] * quad_.weights[k];
        out += (w * p(v)) * evaluate_all(v);
      }
    }
  }
  return out;
}

Vector HermiteBasis::chi(int j) const {
  if (degree_ < 2) throw std::invalid_argument("chi_j needs basis degree >= 2");
  Vector c = Vector::Zero(dimension());
  switch (j) {
    case 0:
      c[index_of({0, 0, 0})] = 1.0;
      break;
    case 1:
      c[index_of({1, 0, 0})] = 1.0;
      break;
    case 2:
      c[index_of({0, 1, 0})] = 1.0;
      break;
    case 3:
      c[index_of({0, 0, 1})] = 1.0;
      break;
    case 4: {
      // (|v|^2 - 3)/sqrt(6) = (He_2(v1)+He_2(v2)+He_2(v3))/sqrt(6)
      Real w = 1.0 / std::sqrt(3.0);
      c[index_of({2, 0, 0})] = w;
      c[index_of({0, 2, 0})] = w;
      c[index_of({0, 0, 2})] = w;
      break;
    }
    default:
      throw std::invalid_argument("chi index must be 0..4");
  }
  return c;
}

Matrix HermiteBasis::gram_matrix() const {
  int n = quad_.nodes.size();
  Matrix G = Matrix::Zero(dimension(), dimension());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        Vec3 v(quad_.nodes[i], quad_.nodes[j], quad_.nodes[k]);
        Real w = quad_.weights[i] * quad_.weights[j] * quad_.weights[k];
        Vector h = evaluate_all(v);
        G.selfadjointView<Eigen::Lower>().rankUpdate(h, w);
      }
    }
  }
  return Matrix(G.selfadjointView<Eigen::Lower>());
}

Matrix HermiteBasis::multiplication_matrix(const Vec3& omega) const {
  if (std::abs(omega.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("direction omega must have unit norm");
  }
  return omega[0] * vmul_[0] + omega[1] * vmul_[1] + omega[2] * vmul_[2];
}

Matrix HermiteBasis::rotation_matrix(const Mat3& O) const {
  int n = quad_.nodes.size();
  Matrix R = Matrix::Zero(dimension(), dimension());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        Vec3 v(quad_.nodes[i], quad_.nodes[j], quad_.nodes[k]);
        Real w = quad_.weights[i] * quad_.weights[j] * quad_.weights[k];
        R += w * (evaluate_all(O * v) * evaluate_all(v).transpose());
      }
    }
  }
  return R;
}

ProjectionSet projections(const HermiteBasis& basis) {
  if (basis.degree() < 2) {
    throw std::invalid_argument("projections need basis degree >= 2 (chi_4)");
  }
  int dim = basis.dimension();
  ProjectionSet ps;
  ps.P0 = Matrix::Zero(dim, dim);
  for (int j = 0; j <= 4; ++j) {
    Vector c = basis.chi(j);
    ps.P0 += c * c.transpose();
  }
  ps.P1 = Matrix::Identity(dim, dim) - ps.P0;
  Vector c0 = basis.chi(0);
  ps.Pd = c0 * c0.transpose();
  return ps;
}

Matrix WeightedMetric::gram() const {
  Matrix G = Matrix::Identity(dim, dim);
  G(0, 0) += 1.0 / (s * s);
  return G;
}

WeightedMetric weighted_metric(Real s, const HermiteBasis& basis) {
  if (!(s > 0)) throw std::invalid_argument("weighted metric needs s > 0");
  return WeightedMetric{s, basis.dimension()};
}

Complex weighted_inner(const CVector& f, const CVector& g, Real s) {
  if (!(s > 0)) throw std::invalid_argument("weighted inner product needs s > 0");
  // (f,g) conjugates the second argument; P_d picks the chi_0 coefficient.
  return g.dot(f) + f[0] * std::conj(g[0]) / (s * s);
}

Complex weighted_bilinear(const CVector& f, const CVector& g, Real s) {
  return f.cwiseProduct(g).sum() + f[0] * g[0] / (s * s);
}

Real weighted_norm(const CVector& f, Real s) {
  return std::sqrt(std::real(weighted_inner(f, f, s)));
}

}  // namespace vpb
