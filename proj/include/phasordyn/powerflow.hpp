#pragma once

#include "phasordyn/network.hpp"

#include <vector>

namespace phasordyn {

// Polar Newton-Raphson power flow with a flat start.  Voltage-dependent
// (exponential) loads are folded directly into the mismatch equations so the
// solution is consistent with the dynamic load model from the first step.

struct ExponentialLoadSpec {
  int bus = -1;
  Real p0 = 0.0; // pu on system base, consumption positive
  Real q0 = 0.0;
  Real v0 = 1.0;
  Real alpha = 1.0;
  Real beta = 2.0;
};

struct PowerFlowInput {
  Vec p_injection;                        // pu scheduled device injection per bus
  Vec q_injection;                        // pu, meaningful at pq buses only
  std::vector<ExponentialLoadSpec> loads; // includes static bus loads as alpha=beta=0
};

struct PowerFlowOptions {
  Real tolerance = 1e-8; // pu, infinity norm of the mismatch vector
  int max_iterations = 20;
};

struct PowerFlowSolution {
  ComplexVec v;
  Vec p_calc; // realized net injection per bus, pu
  Vec q_calc;
  int iterations = 0;
  Real mismatch_inf_norm = 0.0;
};

/// Throws NumericError when the iteration fails to converge or the Jacobian
/// becomes singular (load beyond the transfer limit, unsupported islands).
[[nodiscard]] PowerFlowSolution solve_power_flow(const NetworkModel& net,
                                                 const AdmittanceMatrix& adm,
                                                 const PowerFlowInput& input,
                                                 const PowerFlowOptions& opts = {});

} // namespace phasordyn
