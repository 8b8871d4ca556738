#pragma once

#include "phasordyn/model.hpp"
#include "phasordyn/netsolve.hpp"

namespace phasordyn {

// ============================================================================
// Evaluation of the continuous (fast) dynamics at a frozen slow configuration:
// taps, breaker states, limiter statuses and outer-loop integrators are held
// fixed while the network is re-solved for every candidate continuous state.
// This is the object the integrator iterates on and the analysis layer
// differentiates.
// ============================================================================

/// Limiter branch decisions captured at a linearization base point.  Holding
/// them fixed across finite-difference evaluations keeps the Jacobian from
/// mixing one-sided derivatives at clamp kinks.
struct BranchLatch {
  std::vector<int> avr;    // per machine: +1 frozen at ceiling, -1 at floor, 0 free
  std::vector<int> gfl_ip; // per gfl: +1 clamped at upper bound, -1 at lower, 0 free
  std::vector<int> gfl_iq; // per gfl: same encoding for the reactive command
};

struct FastEvaluator {
  const SystemModel* model = nullptr;
  const NetworkModel* net = nullptr; // live working copy (taps/breakers applied)
  const NetworkLu* lu = nullptr;
  const DiscreteState* disc = nullptr;
  Complex slack_e; // frozen slack internal source, system pu
  NetworkSolveOptions net_opts;
  const BranchLatch* latch = nullptr; // set only while building a Jacobian

  /// Solve the algebraic network at continuous state z.  `v` carries the warm
  /// start and receives the solution.  False on fixed-point divergence.
  [[nodiscard]] bool solve_v(const Vec& z, ComplexVec& v) const;

  /// Full derivative evaluation: network solve plus all device dynamics.
  [[nodiscard]] bool eval(const Vec& z, ComplexVec& v, Vec& dz) const;

  /// State-determined fixed injections (slack, machines, grid-following).
  void fixed_injections(const Vec& z, ComplexVec& j) const;

  /// Kirchhoff residual of the stored solution, for consistency checks.
  [[nodiscard]] Real kirchhoff_residual(const Vec& z, const ComplexVec& v) const;

  /// Record which limiter branches are active at (z, v).
  [[nodiscard]] BranchLatch make_latch(const Vec& z, const ComplexVec& v) const;
};

/// Shunt list for the factorized matrix: slack equivalent, machine x'd
/// Nortons, grid-forming coupling reactances.
[[nodiscard]] std::vector<NortonShunt> norton_shunts(const SystemModel& model);

/// Voltage-dependent load table on the system base (zone loads plus static
/// bus loads).
[[nodiscard]] std::vector<VoltageLoad> voltage_loads(const SystemModel& model);

} // namespace phasordyn
