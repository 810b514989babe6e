#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <stdexcept>

namespace vpb {

using Real = double;
using Complex = std::complex<double>;

using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using CMatrix5 = Eigen::Matrix<Complex, 5, 5>;
using CVector5 = Eigen::Matrix<Complex, 5, 1>;

using MultiIndex = std::array<int, 3>;

/// Thrown when a numerical quality gate fails (conditioning, convergence).
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr Complex kImag{0.0, 1.0};

}  // namespace vpb
