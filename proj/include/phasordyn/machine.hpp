#pragma once

#include "phasordyn/types.hpp"

#include <optional>

namespace phasordyn {

// ============================================================================
// Fourth-order two-axis synchronous machine with a first-order exciter, a
// first-order governor, a fixed-delay overexcitation limiter and an optional
// washout/lead-lag stabilizer.  Machine quantities are per unit on the device
// MVA base; the network interface is a Norton source behind x'd.
//
// Frame mapping: a rotor-frame pair (d + jq) maps to the network phasor
// (d + jq) * exp(j(delta - pi/2)), i.e. the q axis sits at angle delta.
// ============================================================================

struct PssParams {
  bool enabled = false;
  Real gain = 5.0;
  Real tw_s = 5.0; // washout
  Real t1_s = 0.2; // lead
  Real t2_s = 0.05; // lag
  Real limit = 0.05; // output clamp, pu

  bool operator==(const PssParams&) const = default;
};

struct OelParams {
  bool enabled = true;
  Real ifd_limit = 2.2; // device pu field current
  Real delay_s = 20.0;  // continuous violation needed before takeover
  Real gain = 0.15;     // integral gain of the field-current loop once limiting

  bool operator==(const OelParams&) const = default;
};

enum class OelStatus { inactive, timing, limiting };

struct OelState {
  OelStatus status = OelStatus::inactive;
  Real timer_s = 0.0;
};

struct MachineParams {
  Real s_rated_mva = 100.0;
  Real h_s = 4.0;
  Real d_pu = 2.0;
  Real xd = 2.0;
  Real xq = 1.9;
  Real xd_p = 0.3;
  Real xq_p = 0.3; // kept equal to xd_p so the Norton interface stays exact
  Real td0_p_s = 6.0;
  Real tq0_p_s = 1.0;
  // exciter
  Real ka = 50.0;
  Real ta_s = 0.5;
  Real efd_min = 0.0;
  Real efd_max = 4.0;
  // governor
  Real droop = 0.05;
  Real tg_s = 2.0;
  Real p_max = 1.1; // device pu mechanical ceiling
  OelParams oel;
  PssParams pss;

  bool operator==(const MachineParams&) const = default;
};

struct MachineState {
  Real delta = 0.0; // rad, network frame
  Real omega = 0.0; // pu speed deviation
  Real eq_p = 0.0;
  Real ed_p = 0.0;
};

struct AvrState {
  Real x_avr = 0.0;
  Real v_ref = 1.0;
};

struct GovState {
  Real x_gov = 0.0;
  Real p_ref = 0.0;
};

struct PssState {
  Real x_wash = 0.0;
  Real x_lead = 0.0;
};

struct MachineDerivatives {
  Real d_delta = 0.0;
  Real d_omega = 0.0;
  Real d_eq_p = 0.0;
  Real d_ed_p = 0.0;
  // algebraic outputs at the evaluation point
  Real id = 0.0;
  Real iq = 0.0;
  Real pe = 0.0;
  Real ifd = 0.0;
};

struct AvrGovDerivatives {
  Real d_x_avr = 0.0;
  Real d_x_gov = 0.0;
  Real efd = 0.0; // clamped exciter output actually applied
  Real pm = 0.0;  // clamped mechanical power
};

struct MachineInit {
  MachineState state;
  AvrState avr;
  GovState gov;
  Real efd = 0.0;
  Real ifd = 0.0;
};

/// Stator currents (device pu, dq frame) from internal flux state and the
/// terminal phasor.
void machine_dq_currents(const MachineState& ms, const MachineParams& p,
                         Complex v_terminal, Real& id, Real& iq);

/// Norton current injected into the network, device pu.
[[nodiscard]] Complex machine_network_current(const MachineState& ms,
                                              const MachineParams& p,
                                              Complex v_terminal);

[[nodiscard]] MachineDerivatives machine_derivatives(const MachineState& ms,
                                                     const MachineParams& p,
                                                     Complex v_terminal, Real efd,
                                                     Real pm, Real omega_base);

/// Exciter + governor dynamics.  While the limiter is in `limiting` the
/// voltage channel is replaced by an integral loop that regulates the field
/// current onto its limit.
[[nodiscard]] AvrGovDerivatives avr_gov_derivatives(const AvrState& avr,
                                                    const GovState& gov,
                                                    const MachineParams& p,
                                                    OelStatus oel_status, Real v_meas,
                                                    Real ifd, Real pss_signal,
                                                    Real omega);

[[nodiscard]] Real pss_output(const PssParams& p, const PssState& s, Real omega);
void pss_derivatives(const PssParams& p, const PssState& s, Real omega,
                     Real& d_wash, Real& d_lead);

/// Timer-based limiter update, called once per accepted step.  Returns true
/// when this call flips the status to limiting (the caller journals it).
bool oel_update(OelState& oel, const OelParams& p, Real ifd, Real dt);

/// Steady-state back-solve from a converged power flow.  `s_dev` is the
/// generated power in device pu, `v_terminal` the solved phasor.  Throws
/// NumericError when the required excitation leaves [efd_min, efd_max].
[[nodiscard]] MachineInit init_machine(const MachineParams& p, Complex v_terminal,
                                       Complex s_dev);

} // namespace phasordyn
