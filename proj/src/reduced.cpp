#include "phasordyn/reduced.hpp"

#include "phasordyn/powerflow.hpp"

#include <cmath>
#include <cstdio>

namespace phasordyn {

namespace {

constexpr Real kSystemBase = 1000.0;

// Dispatch power flow for a corridor scenario, mirroring the engine's
// initialization, so baked setpoints land exactly on the run's equilibrium.
PowerFlowSolution corridor_power_flow(const Scenario& sc) {
  const int n = static_cast<int>(sc.network.buses.size());
  PowerFlowInput in;
  in.p_injection = Vec::Zero(n);
  in.q_injection = Vec::Zero(n);
  for (const auto& m : sc.machines) {
    in.p_injection[sc.network.bus_index(m.bus)] += m.p_mw / sc.s_base_mva;
  }
  for (const auto& g : sc.gfls) {
    in.p_injection[sc.network.bus_index(g.bus)] +=
        g.params.p_ref * g.params.s_rated_mva / sc.s_base_mva;
    in.q_injection[sc.network.bus_index(g.bus)] +=
        g.params.q_ref * g.params.s_rated_mva / sc.s_base_mva;
  }
  for (const auto& g : sc.gfms) {
    in.p_injection[sc.network.bus_index(g.bus)] +=
        g.params.p_set * g.params.s_rated_mva / sc.s_base_mva;
  }
  for (const auto& l : sc.loads) {
    ExponentialLoadSpec spec;
    spec.bus = sc.network.bus_index(l.bus);
    spec.p0 = l.params.p0_mw / sc.s_base_mva;
    spec.q0 = l.params.q0_mvar / sc.s_base_mva;
    spec.v0 = l.params.v0;
    spec.alpha = l.params.alpha;
    spec.beta = l.params.beta;
    in.loads.push_back(spec);
  }
  const AdmittanceMatrix adm = build_admittance(sc.network);
  PowerFlowOptions opts;
  opts.tolerance = 1e-12;
  opts.max_iterations = 40;
  return solve_power_flow(sc.network, adm, in, opts);
}

// Field current the machine needs at a solved operating point.
Real machine_ifd_at(const Scenario& sc, const PowerFlowSolution& pf) {
  const auto& m = sc.machines.front();
  const int bus = sc.network.bus_index(m.bus);
  const Complex v = pf.v[bus];
  const Complex s_dev =
      Complex(pf.p_calc[bus], pf.q_calc[bus]) * sc.s_base_mva / m.params.s_rated_mva;
  const MachineInit init = init_machine(m.params, v, s_dev);
  return init.ifd;
}

} // namespace

Scenario build_corridor(const CorridorConfig& cfg) {
  Scenario sc;
  sc.name = "corridor";
  sc.s_base_mva = kSystemBase;
  sc.f_nom_hz = 50.0;
  sc.slack_internal_x = 0.02;

  auto bus = [&sc](const std::string& id, BusKind kind, Real setpoint) {
    Bus b;
    b.id = id;
    b.base_kv = (id == "dist") ? 20.0 : 400.0;
    b.kind = kind;
    b.v_setpoint = setpoint;
    sc.network.buses.push_back(b);
  };
  bus("north", BusKind::slack, cfg.slack_v_set);
  bus("hub", BusKind::pq, 1.0);
  bus("genbus", BusKind::pv, cfg.gen_v_set);
  bus("ibrbus", BusKind::pq, 1.0);
  bus("dist", BusKind::pq, 1.0);

  auto branch = [&sc](const std::string& id, const std::string& from,
                      const std::string& to, Real r, Real x, Real tap,
                      Real b_shunt = 0.0) {
    Branch b;
    b.id = id;
    b.from = from;
    b.to = to;
    b.r = r;
    b.x = x;
    b.tap_ratio = tap;
    b.b_shunt = b_shunt;
    sc.network.branches.push_back(b);
  };
  branch("tie_a", "north", "hub", cfg.corridor_r, cfg.corridor_x, 1.0, cfg.corridor_b);
  branch("tie_b", "north", "hub", cfg.corridor_r, cfg.corridor_x, 1.0, cfg.corridor_b);
  branch("gen_tr", "hub", "genbus", cfg.gen_tr_x / 10.0, cfg.gen_tr_x, 1.0);
  branch("ibr_tr", "hub", "ibrbus", cfg.ibr_tr_x / 10.0, cfg.ibr_tr_x, 1.0);
  branch("dist_tr", "hub", "dist", cfg.dist_tr_x / 10.0, cfg.dist_tr_x, 1.0);

  {
    MachineConfig m;
    m.name = "gen1";
    m.bus = "genbus";
    m.p_mw = cfg.machine_p_mw;
    m.params.s_rated_mva = cfg.machine_mva;
    m.params.h_s = cfg.machine_h;
    m.params.d_pu = cfg.machine_d;
    m.params.xd = 2.0;
    m.params.xq = 1.9;
    m.params.xd_p = 0.3;
    m.params.xq_p = 0.3;
    m.params.td0_p_s = 6.0;
    m.params.tq0_p_s = 1.0;
    m.params.ka = cfg.machine_ka;
    m.params.ta_s = cfg.machine_ta;
    m.params.efd_min = 0.0;
    m.params.efd_max = cfg.machine_efd_max;
    m.params.droop = 0.05;
    m.params.tg_s = 2.0;
    m.params.p_max = 1.1;
    m.params.oel.enabled = true;
    m.params.oel.delay_s = cfg.oel_delay_s;
    m.params.oel.gain = cfg.oel_gain;
    m.params.oel.ifd_limit = cfg.oel_ifd_limit; // provisional; baked below
    sc.machines.push_back(m);
  }

  {
    GflConfig g;
    g.name = "ibr1";
    g.bus = "ibrbus";
    g.params.s_rated_mva = cfg.gfl_mva;
    g.params.bw_hz = cfg.pll_bw_hz;
    g.params.zeta = cfg.gfl_zeta;
    g.params.t_g_s = cfg.gfl_t_g;
    g.params.i_max = cfg.gfl_i_max;
    g.params.kqp = 0.0;
    g.params.kqi = cfg.gfl_kqi;
    g.params.deadband = cfg.gfl_deadband;
    g.params.v_ref = 1.0;
    g.params.p_ref = cfg.gfl_p_ref;
    g.params.q_ref = cfg.gfl_q_ref;
    g.params.priority = CurrentPriority::p_priority;
    sc.gfls.push_back(g);
  }

  if (cfg.with_gfm) {
    GfmConfig g;
    g.name = "gfm1";
    g.bus = "ibrbus";
    g.params.s_rated_mva = cfg.gfm_mva;
    g.params.mp = 0.02;
    g.params.mq = 0.05;
    g.params.t_f_s = 0.05;
    g.params.x_s = 0.15;
    g.params.i_max = 1.2;
    g.params.v_set = 1.0; // baked to the dispatch-flow voltage below
    g.params.p_set = 0.0;
    g.params.q_set = 0.0;
    sc.gfms.push_back(g);
  }

  {
    LoadConfig l;
    l.name = "zone1";
    l.bus = "dist";
    l.params.p0_mw = cfg.load_p0_mw;
    l.params.q0_mvar = cfg.load_q0_mvar;
    l.params.v0 = 1.0; // baked below
    l.params.alpha = cfg.load_alpha;
    l.params.beta = cfg.load_beta;
    sc.loads.push_back(l);
  }

  {
    LtcConfig ltc;
    ltc.name = "ltc1";
    ltc.branch = "dist_tr";
    ltc.monitored_bus = "dist";
    ltc.tap_initial = 1.0;
    ltc.v_target = 1.0; // baked below
    ltc.params.enabled = true;
    ltc.params.deadband = cfg.ltc_deadband;
    ltc.params.delay_first_s = 30.0;
    ltc.params.delay_next_s = 10.0;
    ltc.params.step = cfg.ltc_step;
    ltc.params.tap_min = cfg.ltc_tap_min;
    ltc.params.tap_max = 1.15;
    sc.ltcs.push_back(ltc);
  }

  {
    ScenarioEvent trip;
    trip.t_s = cfg.trip_time_s;
    trip.kind = "branch_trip";
    trip.target = "tie_b";
    trip.value = 0.0;
    trip.note = "loss of one corridor circuit";
    sc.events.push_back(trip);
  }

  sc.cvr.enabled = cfg.with_cvr;
  sc.cvr.t_activate_s = 300.0;
  sc.cvr.delta = 0.05;

  sc.sim.dt_s = cfg.dt_s;
  sc.sim.t_end_s = cfg.t_end_s;
  sc.sim.output_every = 10;
  sc.sim.eigen_scan = true;
  sc.sim.scan_interval_s = 5.0;

  sc.outputs.phase_pairs.push_back({"ibr1.x1", "ibr1.x2"});
  sc.outputs.annotation_channel = "zone.p_mw";
  sc.outputs.detect_channel = "bus.hub.v_mag";
  sc.outputs.detect_period_s = 0.9; // corridor mode sits near 7 rad/s

  // Bake voltage-dependent references from the dispatch power flow so the
  // undisturbed scenario starts exactly at equilibrium.  The load reference
  // voltage feeds back into the flow, so iterate to the joint fixed point.
  PowerFlowSolution pf = corridor_power_flow(sc);
  Real v_dist = std::abs(pf.v[sc.network.bus_index("dist")]);
  for (int pass = 0; pass < 50; ++pass) {
    sc.loads[0].params.v0 = v_dist;
    pf = corridor_power_flow(sc);
    const Real v_new = std::abs(pf.v[sc.network.bus_index("dist")]);
    const bool settled = std::abs(v_new - v_dist) < 1e-13;
    v_dist = v_new;
    if (settled) break;
  }
  sc.loads[0].params.v0 = v_dist;
  sc.ltcs[0].v_target = v_dist;
  if (cfg.with_gfm) {
    // Droop equilibrium with zero reactive output sits exactly at the solved
    // terminal voltage.
    sc.gfms[0].params.v_set = std::abs(pf.v[sc.network.bus_index("ibrbus")]);
  }
  if (cfg.oel_ifd_limit > 0.0) {
    sc.machines[0].params.oel.ifd_limit = cfg.oel_ifd_limit;
  } else {
    sc.machines[0].params.oel.ifd_limit = cfg.oel_ifd_margin * machine_ifd_at(sc, pf);
  }
  return sc;
}

Scenario build_preset(int number) {
  CorridorConfig cfg;
  switch (number) {
    case 1:
      break;
    case 2:
      cfg.with_cvr = true;
      break;
    case 3:
      cfg.with_cvr = true;
      cfg.pll_bw_hz = 4.0;
      break;
    case 4:
      cfg.with_cvr = true;
      cfg.with_gfm = true;
      break;
    default:
      throw ConfigError("preset number must be 1..4");
  }
  Scenario sc = build_corridor(cfg);
  sc.name = "case" + std::to_string(number);
  return sc;
}

std::string tune_report(const CorridorConfig& cfg) {
  Scenario sc = build_corridor(cfg);
  const PowerFlowSolution pre = corridor_power_flow(sc);
  const int dist = sc.network.bus_index("dist");
  const int ibr = sc.network.bus_index("ibrbus");

  const Real v0 = sc.loads[0].params.v0;
  const Real pre_load =
      load_power(sc.loads[0].params, std::abs(pre.v[dist])).p_mw;

  // Post-trip flow with one tie circuit out.
  Scenario tripped = sc;
  tripped.network.branches[tripped.network.branch_index("tie_b")].in_service = false;
  const PowerFlowSolution post = corridor_power_flow(tripped);
  const Real post_load =
      load_power(sc.loads[0].params, std::abs(post.v[dist])).p_mw;

  // Post-trip Thevenin impedance at the plant bus with the machine and slack
  // represented by their internal reactances.
  AdmittanceMatrix adm = build_admittance(tripped.network);
  ComplexMat y = adm.y;
  y(sc.network.bus_index("north"), sc.network.bus_index("north")) +=
      Real(1) / Complex(0.0, sc.slack_internal_x);
  const auto& mp = sc.machines[0].params;
  y(sc.network.bus_index("genbus"), sc.network.bus_index("genbus")) +=
      (mp.s_rated_mva / sc.s_base_mva) / Complex(0.0, mp.xd_p);
  const ComplexMat z = y.inverse();
  const Real z_th = std::abs(z(ibr, ibr));
  const Real scr = (sc.s_base_mva / z_th) / sc.gfls[0].params.s_rated_mva;

  const auto& ltc = sc.ltcs[0];
  const int taps_down =
      static_cast<int>(std::floor((ltc.tap_initial - ltc.params.tap_min) /
                                      ltc.params.step +
                                  1e-9));

  char buf[256];
  std::string out;
  out += "corridor tuning summary\n";
  out += "=======================\n";
  std::snprintf(buf, sizeof buf,
                "zone load: nominal %.1f MW; pre-trip %.1f MW; post-trip short-term %.1f MW\n",
                sc.loads[0].params.p0_mw, pre_load, post_load);
  out += buf;
  std::snprintf(buf, sizeof buf,
                "full-scale anchor: 5820 MW pre-trip vs 5700 MW restored zone load maps to "
                "%.1f vs %.1f MW here\n",
                pre_load, post_load);
  out += buf;
  std::snprintf(buf, sizeof buf,
                "load reference voltage v0 %.6f pu; distribution target %.6f pu\n", v0,
                ltc.v_target);
  out += buf;
  std::snprintf(buf, sizeof buf,
                "post-trip grid strength at the plant bus: Zth %.4f pu, SCR %.2f%s\n", z_th,
                scr, scr < 1.2 ? " (flagged: weak, below 1.2)" : "");
  out += buf;
  std::snprintf(buf, sizeof buf,
                "field-current limit %.4f (margin %.2f over initial); takeover expected "
                "as restoration finishes, before 200 s\n",
                sc.machines[0].params.oel.ifd_limit, cfg.oel_ifd_margin);
  out += buf;
  std::snprintf(buf, sizeof buf, "tap range to the lower bound: %d steps of %.3f\n",
                taps_down, ltc.params.step);
  out += buf;
  return out;
}

} // namespace phasordyn
