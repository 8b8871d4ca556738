#pragma once

#include "phasordyn/scenario.hpp"

#include <string>

namespace phasordyn {

// ============================================================================
// Reduced north-to-central transfer corridor: a stiff northern source feeding
// a central hub over a long double-circuit tie, with a local machine, a
// grid-following plant, an LTC-fed load zone and (optionally) a grid-forming
// battery at the plant bus.  Tuned so that losing one tie circuit starts a
// load-restoration sequence whose end state is oscillatory-unstable for the
// fast PLL, and stable for the detuned PLL or with the battery connected.
// ============================================================================

struct CorridorConfig {
  Real pll_bw_hz = 8.0;
  bool with_gfm = false;
  bool with_cvr = false;
  Real t_end_s = 600.0;
  Real dt_s = 0.002;

  // tuned operating point; exposed for experiments
  Real corridor_x = 0.30;      // per circuit, system pu
  Real corridor_r = 0.015;
  Real corridor_b = 0.0;       // charging per circuit; lost with the circuit
  Real slack_v_set = 1.02;
  Real machine_d = 2.0;
  Real machine_ka = 100.0;
  Real machine_ta = 0.2;
  Real machine_h = 4.0;
  Real machine_efd_max = 4.5;
  Real ltc_tap_min = 0.85;
  Real gen_v_set = 1.0;
  Real gen_tr_x = 0.04;
  Real ibr_tr_x = 0.03;
  Real dist_tr_x = 0.02;
  Real load_p0_mw = 800.0;
  Real load_q0_mvar = 160.0;
  Real load_alpha = 1.2;
  Real load_beta = 2.0;
  Real machine_mva = 300.0;
  Real machine_p_mw = 240.0;
  Real gfl_mva = 400.0;
  Real gfl_p_ref = 0.85;
  Real gfl_zeta = 0.707;
  Real gfl_t_g = 0.02;
  Real gfl_i_max = 1.2;
  Real gfl_kqi = 20.0;
  Real gfl_deadband = 0.05;
  Real gfl_q_ref = 0.0;
  Real gfm_mva = 100.0;
  Real oel_ifd_limit = 0.0; // 0 = pick relative to the initial field current
  Real oel_ifd_margin = 1.06;
  Real oel_delay_s = 20.0;
  Real oel_gain = 0.15;
  Real ltc_step = 0.01;
  Real ltc_deadband = 0.005;
  Real trip_time_s = 5.0;
};

/// Scenario for one corridor configuration (power flow solved internally so
/// LTC targets, load reference voltages and device setpoints are consistent).
[[nodiscard]] Scenario build_corridor(const CorridorConfig& cfg);

/// Study cases 1-4: fast PLL; fast PLL + CVR; slow PLL + CVR; fast PLL +
/// CVR + grid-forming battery.
[[nodiscard]] Scenario build_preset(int number);

/// Human-readable tuning summary: full-scale anchors vs. this system's scaled
/// values, post-trip grid strength at the plant bus, tap margins.
[[nodiscard]] std::string tune_report(const CorridorConfig& cfg = {});

} // namespace phasordyn
