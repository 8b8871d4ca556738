#include "phasordyn/gfl.hpp"

#include <algorithm>
#include <cmath>

namespace phasordyn {

std::pair<Real, Real> pll_gains_from_bandwidth(Real bw_hz, Real zeta) {
  if (bw_hz <= 0.0 || zeta <= 0.0) {
    throw ConfigError("pll gains: bandwidth and damping must be positive");
  }
  const Real wn = 2.0 * kPi * bw_hz;
  return {2.0 * zeta * wn, wn * wn};
}

std::pair<Real, Real> pll_derivatives(const PllState& pll, Complex v_terminal) {
  const Real vm = std::abs(v_terminal);
  Real e = 0.0;
  if (vm > 1e-12) {
    e = vm * std::sin(std::arg(v_terminal) - pll.x2);
  }
  return {pll.ki * e, pll.kp * e + pll.x1};
}

std::pair<Real, Real> current_control_derivatives(const CurrentControlState& cc,
                                                  Real t_g_s) {
  return {(cc.ip_cmd - cc.ip) / t_g_s, (cc.iq_cmd - cc.iq) / t_g_s};
}

Real outer_voltage_error(const GflParams& p, Real v_meas) {
  const Real err = p.v_ref - v_meas;
  if (std::abs(err) <= p.deadband) return 0.0;
  return err - (err > 0.0 ? p.deadband : -p.deadband);
}

GflCommands outer_commands(const GflParams& p, Real x_q, Real v_meas) {
  GflCommands cmd;
  const Real err = outer_voltage_error(p, v_meas);
  const Real iq_raw = x_q + p.kqp * err;
  const Real ip_raw = p.p_ref / std::max(v_meas, 0.1);
  if (p.priority == CurrentPriority::q_priority) {
    cmd.iq_cmd = std::clamp(iq_raw, -p.i_max, p.i_max);
    const Real head = std::sqrt(std::max(0.0, p.i_max * p.i_max - cmd.iq_cmd * cmd.iq_cmd));
    cmd.ip_cmd = std::clamp(ip_raw, 0.0, head);
  } else {
    cmd.ip_cmd = std::clamp(ip_raw, 0.0, p.i_max);
    const Real head = std::sqrt(std::max(0.0, p.i_max * p.i_max - cmd.ip_cmd * cmd.ip_cmd));
    cmd.iq_cmd = std::clamp(iq_raw, -head, head);
  }
  return cmd;
}

GflCommands outer_commands_on_branch(const GflParams& p, Real x_q, Real v_meas,
                                     int ip_branch, int iq_branch) {
  GflCommands cmd;
  const Real err = outer_voltage_error(p, v_meas);
  const Real iq_raw = x_q + p.kqp * err;
  const Real ip_raw = p.p_ref / std::max(v_meas, 0.1);
  if (p.priority == CurrentPriority::q_priority) {
    cmd.iq_cmd = iq_branch > 0 ? p.i_max : iq_branch < 0 ? -p.i_max : iq_raw;
    const Real head = std::sqrt(std::max(0.0, p.i_max * p.i_max - cmd.iq_cmd * cmd.iq_cmd));
    cmd.ip_cmd = ip_branch > 0 ? head : ip_branch < 0 ? 0.0 : ip_raw;
  } else {
    cmd.ip_cmd = ip_branch > 0 ? p.i_max : ip_branch < 0 ? 0.0 : ip_raw;
    const Real head = std::sqrt(std::max(0.0, p.i_max * p.i_max - cmd.ip_cmd * cmd.ip_cmd));
    cmd.iq_cmd = iq_branch > 0 ? head : iq_branch < 0 ? -head : iq_raw;
  }
  return cmd;
}

GflCommands outer_control_step(OuterControlState& oc, const GflParams& p,
                               Real v_meas, Real dt) {
  const Real err = outer_voltage_error(p, v_meas);
  const GflCommands now = outer_commands(p, oc.x_q, v_meas);
  const Real iq_raw = oc.x_q + p.kqp * err;
  // Conditional integration: stop winding while the command is pinned to a
  // limit and the error keeps pushing into it.
  const bool pinned_hi = iq_raw > now.iq_cmd + 1e-12 && err > 0.0;
  const bool pinned_lo = iq_raw < now.iq_cmd - 1e-12 && err < 0.0;
  if (!pinned_hi && !pinned_lo) {
    oc.x_q += dt * p.kqi * err;
  }
  return outer_commands(p, oc.x_q, v_meas);
}

Complex gfl_injection(const PllState& pll, const CurrentControlState& cc,
                      Real scale) {
  return Complex(cc.ip, -cc.iq) * std::polar(1.0, pll.x2) * scale;
}

} // namespace phasordyn
