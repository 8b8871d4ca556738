#pragma once

#include "phasordyn/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace phasordyn {

// Long-term actors: discrete load tap changers restoring distribution voltage,
// exponential voltage-dependent loads, and the conservation-voltage-reduction
// control that lowers LTC targets once at a set time.

struct LtcParams {
  bool enabled = true;
  Real deadband = 0.01;     // pu, half-width around the target
  Real delay_first_s = 30.0; // before the first step of a sequence
  Real delay_next_s = 10.0;  // between subsequent steps
  Real step = 0.01;
  Real tap_min = 0.85;
  Real tap_max = 1.15;

  bool operator==(const LtcParams&) const = default;
};

struct LtcState {
  Real tap = 1.0;
  Real v_target = 1.0; // runtime value; CVR rescales it
  Real timer_s = 0.0;
  bool stepped_before = false; // selects delay_first vs delay_next
};

enum class TapRequest { none, lower_ratio, raise_ratio };

/// Timer/deadband logic, called once per step with the monitored distribution
/// voltage.  A lower ratio raises the distribution voltage.  Requests that
/// would leave [tap_min, tap_max] are suppressed (the timer keeps running).
TapRequest ltc_update(LtcState& s, const LtcParams& p, Real v_dist, Real dt);

struct LoadParams {
  Real p0_mw = 0.0;
  Real q0_mvar = 0.0;
  Real v0 = 1.0;
  Real alpha = 1.0;
  Real beta = 2.0;

  bool operator==(const LoadParams&) const = default;
};

struct LoadPower {
  Real p_mw = 0.0;
  Real q_mvar = 0.0;
};

[[nodiscard]] LoadPower load_power(const LoadParams& p, Real v);

/// Nominal minus actual zone consumption, MW: how much restoration is pending.
[[nodiscard]] Real restoration_deficit(std::span<const LoadParams> loads,
                                       std::span<const Real> v_now);

struct CvrSettings {
  bool enabled = false;
  Real t_activate_s = 300.0;
  Real delta = 0.05; // relative target reduction

  bool operator==(const CvrSettings&) const = default;
};

/// Scale every LTC target once.  Returns false when already applied.
bool cvr_apply(std::vector<LtcState>& ltcs, const CvrSettings& cvr, bool& applied_flag);

} // namespace phasordyn
