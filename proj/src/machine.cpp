#include "phasordyn/machine.hpp"

#include <cmath>

namespace phasordyn {

namespace {

Complex rotor_frame(const MachineState& ms) {
  return std::polar(1.0, ms.delta - kPi / 2.0);
}

Real clamp(Real x, Real lo, Real hi) { return std::min(std::max(x, lo), hi); }

} // namespace

void machine_dq_currents(const MachineState& ms, const MachineParams& p,
                         Complex v_terminal, Real& id, Real& iq) {
  const Complex v_dq = v_terminal * std::conj(rotor_frame(ms));
  const Real vd = v_dq.real();
  const Real vq = v_dq.imag();
  // Stator algebra with zero armature resistance:
  //   vd = ed' + xq'*iq,  vq = eq' - xd'*id
  iq = (vd - ms.ed_p) / p.xq_p;
  id = (ms.eq_p - vq) / p.xd_p;
}

Complex machine_network_current(const MachineState& ms, const MachineParams& p,
                                Complex v_terminal) {
  Real id = 0.0, iq = 0.0;
  machine_dq_currents(ms, p, v_terminal, id, iq);
  return Complex(id, iq) * rotor_frame(ms);
}

MachineDerivatives machine_derivatives(const MachineState& ms,
                                       const MachineParams& p, Complex v_terminal,
                                       Real efd, Real pm, Real omega_base) {
  MachineDerivatives d;
  machine_dq_currents(ms, p, v_terminal, d.id, d.iq);
  d.pe = ms.ed_p * d.id + ms.eq_p * d.iq + (p.xq_p - p.xd_p) * d.id * d.iq;
  d.ifd = ms.eq_p + (p.xd - p.xd_p) * d.id;
  d.d_delta = ms.omega * omega_base;
  d.d_omega = (pm - d.pe - p.d_pu * ms.omega) / (2.0 * p.h_s);
  d.d_eq_p = (-ms.eq_p - (p.xd - p.xd_p) * d.id + efd) / p.td0_p_s;
  d.d_ed_p = (-ms.ed_p + (p.xq - p.xq_p) * d.iq) / p.tq0_p_s;
  return d;
}

AvrGovDerivatives avr_gov_derivatives(const AvrState& avr, const GovState& gov,
                                      const MachineParams& p, OelStatus oel_status,
                                      Real v_meas, Real ifd, Real pss_signal,
                                      Real omega) {
  AvrGovDerivatives d;
  d.efd = clamp(avr.x_avr, p.efd_min, p.efd_max);
  if (oel_status == OelStatus::limiting) {
    // Integral takeover: drive the field current onto its limit.
    d.d_x_avr = p.oel.gain * (p.oel.ifd_limit - ifd);
  } else {
    d.d_x_avr = (-avr.x_avr + p.ka * (avr.v_ref - v_meas + pss_signal)) / p.ta_s;
  }
  // Freeze at the ceilings so the state cannot wind past the usable range.
  if (avr.x_avr >= p.efd_max && d.d_x_avr > 0.0) d.d_x_avr = 0.0;
  if (avr.x_avr <= p.efd_min && d.d_x_avr < 0.0) d.d_x_avr = 0.0;

  d.d_x_gov = (-gov.x_gov + gov.p_ref - omega / p.droop) / p.tg_s;
  d.pm = clamp(gov.x_gov, 0.0, p.p_max);
  return d;
}

Real pss_output(const PssParams& p, const PssState& s, Real omega) {
  if (!p.enabled) return 0.0;
  const Real washed = p.gain * omega - s.x_wash;
  const Real led = s.x_lead + (p.t1_s / p.t2_s) * (washed - s.x_lead);
  return clamp(led, -p.limit, p.limit);
}

void pss_derivatives(const PssParams& p, const PssState& s, Real omega,
                     Real& d_wash, Real& d_lead) {
  if (!p.enabled) {
    d_wash = 0.0;
    d_lead = 0.0;
    return;
  }
  const Real washed = p.gain * omega - s.x_wash;
  d_wash = washed / p.tw_s;
  d_lead = (washed - s.x_lead) / p.t2_s;
}

bool oel_update(OelState& oel, const OelParams& p, Real ifd, Real dt) {
  if (!p.enabled || oel.status == OelStatus::limiting) return false;
  const bool over = ifd > p.ifd_limit;
  if (!over) {
    oel.status = OelStatus::inactive;
    oel.timer_s = 0.0;
    return false;
  }
  oel.status = OelStatus::timing;
  oel.timer_s += dt;
  if (oel.timer_s + 1e-9 >= p.delay_s) {
    oel.status = OelStatus::limiting;
    return true;
  }
  return false;
}

MachineInit init_machine(const MachineParams& p, Complex v_terminal,
                         Complex s_dev) {
  MachineInit init;
  if (std::abs(v_terminal) < 1e-6) throw NumericError("machine init: dead terminal bus");
  const Complex i_term = std::conj(s_dev / v_terminal);
  // Rotor position from the steady-state phasor diagram behind xq.
  const Complex e_q_axis = v_terminal + Complex(0.0, p.xq) * i_term;
  init.state.delta = std::arg(e_q_axis);
  init.state.omega = 0.0;

  const Complex rot = std::polar(1.0, init.state.delta - kPi / 2.0);
  const Complex v_dq = v_terminal * std::conj(rot);
  const Complex i_dq = i_term * std::conj(rot);
  const Real vd = v_dq.real(), vq = v_dq.imag();
  const Real id = i_dq.real(), iq = i_dq.imag();
  init.state.eq_p = vq + p.xd_p * id;
  init.state.ed_p = vd - p.xq_p * iq;

  init.efd = init.state.eq_p + (p.xd - p.xd_p) * id;
  init.ifd = init.efd; // field equation balance at steady state
  if (init.efd < p.efd_min || init.efd > p.efd_max) {
    throw NumericError("machine init: required excitation " + std::to_string(init.efd) +
                       " outside limits");
  }
  const Real pe = init.state.ed_p * id + init.state.eq_p * iq +
                  (p.xq_p - p.xd_p) * id * iq;
  if (pe < 0.0 || pe > p.p_max) {
    throw NumericError("machine init: dispatch " + std::to_string(pe) +
                       " outside governor range");
  }
  init.avr.x_avr = init.efd;
  init.avr.v_ref = std::abs(v_terminal) + init.efd / p.ka;
  init.gov.x_gov = pe;
  init.gov.p_ref = pe;
  return init;
}

} // namespace phasordyn
