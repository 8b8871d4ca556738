#include "phasordyn/slowdyn.hpp"

#include <cmath>

namespace phasordyn {

TapRequest ltc_update(LtcState& s, const LtcParams& p, Real v_dist, Real dt) {
  if (!p.enabled) {
    s.timer_s = 0.0;
    return TapRequest::none;
  }
  const Real err = v_dist - s.v_target;
  if (std::abs(err) <= p.deadband) {
    // Back inside the band: the sequence is over.
    s.timer_s = 0.0;
    s.stepped_before = false;
    return TapRequest::none;
  }
  s.timer_s += dt;
  const Real need = s.stepped_before ? p.delay_next_s : p.delay_first_s;
  if (s.timer_s + 1e-9 < need) return TapRequest::none;
  s.timer_s = 0.0;
  s.stepped_before = true;
  if (err < 0.0) {
    // Voltage low: lowering the ratio raises the distribution side.
    if (s.tap - p.step >= p.tap_min - 1e-12) return TapRequest::lower_ratio;
    return TapRequest::none;
  }
  if (s.tap + p.step <= p.tap_max + 1e-12) return TapRequest::raise_ratio;
  return TapRequest::none;
}

LoadPower load_power(const LoadParams& p, Real v) {
  LoadPower out;
  const Real ratio = std::max(v, 0.0) / p.v0;
  out.p_mw = p.p0_mw * std::pow(ratio, p.alpha);
  out.q_mvar = p.q0_mvar * std::pow(ratio, p.beta);
  return out;
}

Real restoration_deficit(std::span<const LoadParams> loads,
                         std::span<const Real> v_now) {
  Real deficit = 0.0;
  for (std::size_t i = 0; i < loads.size(); ++i) {
    deficit += loads[i].p0_mw - load_power(loads[i], v_now[i]).p_mw;
  }
  return deficit;
}

bool cvr_apply(std::vector<LtcState>& ltcs, const CvrSettings& cvr,
               bool& applied_flag) {
  if (!cvr.enabled || applied_flag) return false;
  for (auto& ltc : ltcs) ltc.v_target *= (1.0 - cvr.delta);
  applied_flag = true;
  return true;
}

} // namespace phasordyn
