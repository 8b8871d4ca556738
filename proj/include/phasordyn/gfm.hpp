#pragma once

#include "phasordyn/types.hpp"

namespace phasordyn {

// Droop-controlled grid-forming source: internal phasor e_mag∠theta behind a
// coupling reactance x_s, P-f and Q-V droops acting on filtered terminal
// power.  Current is clamped by magnitude, preserving its angle.

struct GfmParams {
  Real s_rated_mva = 100.0;
  Real mp = 0.02;   // pu frequency per pu power
  Real mq = 0.05;   // pu voltage per pu reactive power
  Real t_f_s = 0.05; // power measurement filter
  Real x_s = 0.15;
  Real i_max = 1.2;
  Real v_set = 1.0;
  Real p_set = 0.0;
  Real q_set = 0.0;

  bool operator==(const GfmParams&) const = default;
};

struct GfmState {
  Real theta = 0.0; // rad, network frame
  Real p_filt = 0.0;
  Real q_filt = 0.0;
};

struct GfmDerivatives {
  Real d_theta = 0.0;
  Real d_p_filt = 0.0;
  Real d_q_filt = 0.0;
  Real p = 0.0; // instantaneous terminal power, device pu
  Real q = 0.0;
  Real e_mag = 0.0;
};

[[nodiscard]] Real gfm_emag(const GfmParams& p, Real q_filt);

/// Internal source phasor, device pu.
[[nodiscard]] Complex gfm_internal_voltage(const GfmParams& p, const GfmState& s);

/// Terminal current with the magnitude clamp applied, device pu.
[[nodiscard]] Complex gfm_current(const GfmParams& p, const GfmState& s, Complex v_terminal);

[[nodiscard]] GfmDerivatives gfm_derivatives(const GfmParams& p, const GfmState& s,
                                             Complex v_terminal, Real omega_base);

} // namespace phasordyn
