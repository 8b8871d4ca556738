#pragma once

#include "phasordyn/network.hpp"

#include <span>
#include <utility>

namespace phasordyn {

// Algebraic network solution for one time point.  Voltage-stiff devices
// (machines, droop sources, the slack equivalent) enter as Norton pairs whose
// shunt part is folded into the factorized matrix; voltage-dependent loads and
// current-limited sources are resolved by fixed-point iteration on the
// injection vector.

struct NortonShunt {
  int bus = -1;
  Complex y; // system-base admittance added to the diagonal
};

struct VoltageLoad {
  int bus = -1;
  Real p0 = 0.0; // pu consumption at v0
  Real q0 = 0.0;
  Real v0 = 1.0;
  Real alpha = 1.0;
  Real beta = 2.0;
};

/// Voltage source behind a reactance whose current magnitude is clamped.
/// Everything device-base except `scale` (device-to-system current factor).
struct CurrentLimitedSource {
  int bus = -1;
  Complex e;       // internal phasor, device pu
  Complex y_device; // 1 / (j x_s)
  Real i_max = 0.0; // device pu; <= 0 disables the clamp
  Real scale = 1.0;
};

struct NetworkLu {
  ComplexMat y_aug;
  Eigen::PartialPivLU<ComplexMat> lu;
  bool factorized = false;

  void factorize(const AdmittanceMatrix& base, std::span<const NortonShunt> shunts);
};

struct NetworkSolveOptions {
  Real tolerance = 1e-8; // pu, infinity norm of the voltage update
  int max_iterations = 50;
};

struct NetworkSolveResult {
  bool converged = false;
  int iterations = 0;
  Real residual_inf = 0.0; // Kirchhoff residual ||Y v - i(v)|| at exit
};

/// Solve Y v = i(v).  `j_fixed` carries all state-determined injections
/// (Norton sources and plain current sources); `loads` and `limited` add the
/// voltage-dependent parts.  `v` is the warm start and receives the solution.
NetworkSolveResult solve_network(const NetworkLu& net, const ComplexVec& j_fixed,
                                 std::span<const VoltageLoad> loads,
                                 std::span<const CurrentLimitedSource> limited,
                                 ComplexVec& v, const NetworkSolveOptions& opts = {});

/// Current drawn by an exponential load at voltage `v` (injection is minus this).
[[nodiscard]] Complex load_current(const VoltageLoad& load, Complex v);

/// Limited source current on the system base at terminal voltage `v`.
[[nodiscard]] Complex limited_source_current(const CurrentLimitedSource& src, Complex v);

} // namespace phasordyn
