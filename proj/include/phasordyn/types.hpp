#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace phasordyn {

using Real = double;
using Complex = std::complex<Real>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using ComplexVec = Eigen::VectorXcd;
using ComplexMat = Eigen::MatrixXcd;

inline constexpr Real kPi = 3.141592653589793238462643383279502884;

/// Problems in user-supplied model data (bad references, out-of-range values).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Failures of numerical setup steps (power flow divergence, infeasible dispatch).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Real wrap_angle(Real a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a < -kPi) a += 2.0 * kPi;
  return a;
}

} // namespace phasordyn
