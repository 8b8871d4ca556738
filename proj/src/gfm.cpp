#include "phasordyn/gfm.hpp"

#include <cmath>

namespace phasordyn {

Real gfm_emag(const GfmParams& p, Real q_filt) {
  return p.v_set + p.mq * (p.q_set - q_filt);
}

Complex gfm_internal_voltage(const GfmParams& p, const GfmState& s) {
  return std::polar(gfm_emag(p, s.q_filt), s.theta);
}

Complex gfm_current(const GfmParams& p, const GfmState& s, Complex v_terminal) {
  Complex i = (gfm_internal_voltage(p, s) - v_terminal) / Complex(0.0, p.x_s);
  const Real mag = std::abs(i);
  if (mag > p.i_max) i *= p.i_max / mag;
  return i;
}

GfmDerivatives gfm_derivatives(const GfmParams& p, const GfmState& s,
                               Complex v_terminal, Real omega_base) {
  GfmDerivatives d;
  d.e_mag = gfm_emag(p, s.q_filt);
  const Complex i = gfm_current(p, s, v_terminal);
  const Complex power = v_terminal * std::conj(i);
  d.p = power.real();
  d.q = power.imag();
  d.d_theta = omega_base * p.mp * (p.p_set - s.p_filt);
  d.d_p_filt = (d.p - s.p_filt) / p.t_f_s;
  d.d_q_filt = (d.q - s.q_filt) / p.t_f_s;
  return d;
}

} // namespace phasordyn
