#pragma once

#include "phasordyn/types.hpp"

#include <utility>

namespace phasordyn {

// ============================================================================
// Grid-following inverter: synchronous-reference-frame PLL, first-order
// current-tracking lag, and a merged outer loop (constant active power plus a
// PI voltage regulator) that issues current commands under a shared magnitude
// limit.  Device pu throughout; `scale` converts current to the system base.
//
// The PLL error is the raw quadrature voltage |v| sin(theta_v - x2); it is
// deliberately not normalized by |v|, so the loop gain sags with voltage.
// The injected current (ip - j iq) rotates with the PLL angle x2, which closes
// the loop between the estimated phase and the terminal voltage.
// ============================================================================

enum class CurrentPriority { q_priority, p_priority };

struct GflParams {
  Real s_rated_mva = 100.0;
  Real bw_hz = 8.0;   // PLL design bandwidth
  Real zeta = 0.707;  // PLL damping
  Real t_g_s = 0.02;  // current lag
  Real i_max = 1.2;   // device pu magnitude limit
  Real kqp = 0.0;     // outer voltage PI
  Real kqi = 20.0;
  Real deadband = 0.0; // pu on the voltage error; 0 disables
  Real v_ref = 1.0;
  Real p_ref = 0.8; // device pu active-power command
  Real q_ref = 0.0; // device pu reactive dispatch at the initial power flow
  CurrentPriority priority = CurrentPriority::q_priority;

  bool operator==(const GflParams&) const = default;
};

struct PllState {
  Real x1 = 0.0; // integrator, rad/s
  Real x2 = 0.0; // estimated phase, rad
  Real kp = 0.0;
  Real ki = 0.0;
};

struct CurrentControlState {
  Real ip = 0.0;
  Real iq = 0.0;
  Real ip_cmd = 0.0;
  Real iq_cmd = 0.0;
};

struct OuterControlState {
  Real x_q = 0.0; // PI integrator, device pu current
};

struct GflCommands {
  Real ip_cmd = 0.0;
  Real iq_cmd = 0.0;
};

/// kp = 2 zeta wn, ki = wn^2 with wn = 2 pi bw.  Throws ConfigError on
/// non-positive bandwidth or damping.
[[nodiscard]] std::pair<Real, Real> pll_gains_from_bandwidth(Real bw_hz, Real zeta);

/// d(x1)/dt = ki e, d(x2)/dt = kp e + x1 with e = |v| sin(arg v - x2).
[[nodiscard]] std::pair<Real, Real> pll_derivatives(const PllState& pll, Complex v_terminal);

[[nodiscard]] std::pair<Real, Real> current_control_derivatives(const CurrentControlState& cc,
                                                                Real t_g_s);

/// Voltage error seen by the outer PI after the deadband (shrunk, not
/// stepped, so the command stays continuous in v).
[[nodiscard]] Real outer_voltage_error(const GflParams& p, Real v_meas);

/// Memoryless command law: active command p_ref / max(v, 0.1), reactive from
/// the PI value, allocated under i_max by the configured priority.
[[nodiscard]] GflCommands outer_commands(const GflParams& p, Real x_q, Real v_meas);

/// Command law with the limiter branches chosen externally instead of by
/// comparison (+1 upper bound, -1 lower bound, 0 unclamped).  Used when
/// linearizing at a point that sits on a clamp.
GflCommands outer_commands_on_branch(const GflParams& p, Real x_q, Real v_meas,
                                     int ip_branch, int iq_branch);

/// Advance the PI integrator by one step (conditional integration freezes it
/// while the reactive command sits on a limit) and return fresh commands.
GflCommands outer_control_step(OuterControlState& oc, const GflParams& p, Real v_meas,
                               Real dt);

/// Network injection, system base.
[[nodiscard]] Complex gfl_injection(const PllState& pll, const CurrentControlState& cc,
                                    Real scale);

} // namespace phasordyn
