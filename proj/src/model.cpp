#include "phasordyn/model.hpp"

#include <set>
#include <cmath>

namespace phasordyn {

namespace {

int require_bus(const NetworkModel& net, const std::string& bus,
                const std::string& owner) {
  const int idx = net.bus_index(bus);
  if (idx < 0) throw ConfigError(owner + ": unknown bus '" + bus + "'");
  return idx;
}

void check_positive(Real value, const std::string& what) {
  if (!(value > 0.0)) throw ConfigError(what + " must be positive");
}

void register_name(std::set<std::string>& names, const std::string& name,
                   const std::string& kind) {
  if (name.empty()) throw ConfigError(kind + " with empty name");
  if (!names.insert(name).second) {
    throw ConfigError("duplicate device name '" + name + "'");
  }
}

} // namespace

void validate_scenario(const Scenario& sc) {
  sc.network.validate();
  check_positive(sc.s_base_mva, "s_base_mva");
  check_positive(sc.f_nom_hz, "f_nom_hz");
  check_positive(sc.slack_internal_x, "slack_internal_x");
  check_positive(sc.sim.dt_s, "sim.dt_s");
  if (sc.sim.t_end_s < sc.sim.dt_s) throw ConfigError("sim.t_end_s shorter than one step");
  if (sc.sim.output_every < 1) throw ConfigError("sim.output_every must be >= 1");
  check_positive(sc.sim.scan_interval_s, "sim.scan_interval_s");
  check_positive(sc.outputs.detect_period_s, "outputs.detect_period_s");

  const int slack = sc.network.slack_index();
  std::set<std::string> names;
  std::set<std::string> machine_buses, gfl_buses, gfm_buses;

  for (const auto& m : sc.machines) {
    register_name(names, m.name, "machine");
    const int bus = require_bus(sc.network, m.bus, "machine " + m.name);
    if (bus == slack) throw ConfigError("machine " + m.name + " may not sit on the slack bus");
    if (sc.network.buses[bus].kind != BusKind::pv) {
      throw ConfigError("machine " + m.name + " requires a pv bus");
    }
    if (!machine_buses.insert(m.bus).second) {
      throw ConfigError("two machines on bus '" + m.bus + "'");
    }
    const auto& p = m.params;
    check_positive(p.s_rated_mva, "machine " + m.name + " s_rated_mva");
    check_positive(p.h_s, "machine " + m.name + " h_s");
    check_positive(p.xd_p, "machine " + m.name + " xd_p");
    check_positive(p.td0_p_s, "machine " + m.name + " td0_p_s");
    check_positive(p.tq0_p_s, "machine " + m.name + " tq0_p_s");
    check_positive(p.ka, "machine " + m.name + " ka");
    check_positive(p.ta_s, "machine " + m.name + " ta_s");
    check_positive(p.tg_s, "machine " + m.name + " tg_s");
    check_positive(p.droop, "machine " + m.name + " droop");
    if (p.xd < p.xd_p || p.xq < p.xq_p) {
      throw ConfigError("machine " + m.name + ": transient reactances exceed synchronous");
    }
    if (p.xq_p != p.xd_p) {
      throw ConfigError("machine " + m.name + ": xq_p must equal xd_p");
    }
    if (p.efd_max <= p.efd_min) {
      throw ConfigError("machine " + m.name + ": excitation limits inverted");
    }
    if (m.p_mw < 0.0) throw ConfigError("machine " + m.name + ": negative dispatch");
    if (p.oel.enabled) {
      check_positive(p.oel.ifd_limit, "machine " + m.name + " oel.ifd_limit");
      check_positive(p.oel.delay_s, "machine " + m.name + " oel.delay_s");
      check_positive(p.oel.gain, "machine " + m.name + " oel.gain");
    }
    if (p.pss.enabled) {
      check_positive(p.pss.tw_s, "machine " + m.name + " pss.tw_s");
      check_positive(p.pss.t2_s, "machine " + m.name + " pss.t2_s");
    }
  }

  for (const auto& g : sc.gfls) {
    register_name(names, g.name, "gfl");
    const int bus = require_bus(sc.network, g.bus, "gfl " + g.name);
    if (bus == slack) throw ConfigError("gfl " + g.name + " may not sit on the slack bus");
    if (!gfl_buses.insert(g.bus).second) {
      throw ConfigError("two grid-following devices on bus '" + g.bus + "'");
    }
    const auto& p = g.params;
    check_positive(p.s_rated_mva, "gfl " + g.name + " s_rated_mva");
    check_positive(p.bw_hz, "gfl " + g.name + " bw_hz");
    check_positive(p.zeta, "gfl " + g.name + " zeta");
    check_positive(p.t_g_s, "gfl " + g.name + " t_g_s");
    check_positive(p.i_max, "gfl " + g.name + " i_max");
    if (p.kqp < 0.0 || p.kqi < 0.0) throw ConfigError("gfl " + g.name + ": negative PI gains");
    if (p.deadband < 0.0) throw ConfigError("gfl " + g.name + ": negative deadband");
    if (p.p_ref < 0.0) throw ConfigError("gfl " + g.name + ": negative p_ref");
    if (sc.network.buses[bus].kind == BusKind::pv &&
        std::abs(sc.network.buses[bus].v_setpoint - p.v_ref) > 1e-9) {
      throw ConfigError("gfl " + g.name + ": v_ref must match the bus setpoint");
    }
  }

  for (const auto& g : sc.gfms) {
    register_name(names, g.name, "gfm");
    const int bus = require_bus(sc.network, g.bus, "gfm " + g.name);
    if (bus == slack) throw ConfigError("gfm " + g.name + " may not sit on the slack bus");
    if (!gfm_buses.insert(g.bus).second) {
      throw ConfigError("two grid-forming devices on bus '" + g.bus + "'");
    }
    const auto& p = g.params;
    check_positive(p.s_rated_mva, "gfm " + g.name + " s_rated_mva");
    check_positive(p.mp, "gfm " + g.name + " mp");
    check_positive(p.mq, "gfm " + g.name + " mq");
    check_positive(p.t_f_s, "gfm " + g.name + " t_f_s");
    check_positive(p.x_s, "gfm " + g.name + " x_s");
    check_positive(p.i_max, "gfm " + g.name + " i_max");
  }

  for (const auto& l : sc.loads) {
    register_name(names, l.name, "load");
    require_bus(sc.network, l.bus, "load " + l.name);
    if (l.params.p0_mw < 0.0) throw ConfigError("load " + l.name + ": negative p0_mw");
    check_positive(l.params.v0, "load " + l.name + " v0");
    if (l.params.alpha < 0.0 || l.params.beta < 0.0) {
      throw ConfigError("load " + l.name + ": negative exponent");
    }
  }

  for (const auto& ltc : sc.ltcs) {
    register_name(names, ltc.name, "ltc");
    const int branch = sc.network.branch_index(ltc.branch);
    if (branch < 0) {
      throw ConfigError("ltc " + ltc.name + ": unknown branch '" + ltc.branch + "'");
    }
    require_bus(sc.network, ltc.monitored_bus, "ltc " + ltc.name);
    const auto& p = ltc.params;
    check_positive(p.deadband, "ltc " + ltc.name + " deadband");
    check_positive(p.delay_first_s, "ltc " + ltc.name + " delay_first_s");
    check_positive(p.delay_next_s, "ltc " + ltc.name + " delay_next_s");
    check_positive(p.step, "ltc " + ltc.name + " step");
    if (p.tap_min >= p.tap_max) throw ConfigError("ltc " + ltc.name + ": tap range inverted");
    if (ltc.tap_initial < p.tap_min - 1e-12 || ltc.tap_initial > p.tap_max + 1e-12) {
      throw ConfigError("ltc " + ltc.name + ": tap_initial outside range");
    }
    const Real branch_tap = sc.network.branches[branch].tap_ratio;
    if (std::abs(branch_tap - ltc.tap_initial) > 1e-12) {
      throw ConfigError("ltc " + ltc.name + ": branch tap_ratio differs from tap_initial");
    }
  }

  if (sc.cvr.enabled) {
    if (sc.cvr.delta <= 0.0 || sc.cvr.delta >= 1.0) {
      throw ConfigError("cvr.delta must lie in (0, 1)");
    }
    if (sc.cvr.t_activate_s < 0.0) throw ConfigError("cvr.t_activate_s negative");
    if (sc.ltcs.empty()) throw ConfigError("cvr enabled without any ltc");
  }

  for (const auto& ev : sc.events) {
    if (ev.t_s < 0.0) throw ConfigError("event at negative time");
    if (ev.kind == "branch_trip") {
      if (sc.network.branch_index(ev.target) < 0) {
        throw ConfigError("branch_trip event: unknown branch '" + ev.target + "'");
      }
      if (ev.value != 0.0 && ev.value != 1.0) {
        throw ConfigError("branch_trip event: value must be 0 or 1");
      }
    } else if (ev.kind == "tap_step") {
      bool found = false;
      for (const auto& ltc : sc.ltcs) found = found || ltc.name == ev.target;
      if (!found) throw ConfigError("tap_step event: unknown ltc '" + ev.target + "'");
      if (ev.value != 1.0 && ev.value != -1.0) {
        throw ConfigError("tap_step event: value must be +1 or -1");
      }
    } else if (ev.kind != "custom") {
      throw ConfigError("unknown event kind '" + ev.kind + "'");
    }
  }
}

int StateLayout::index_of(const std::string& channel) const {
  for (int i = 0; i < static_cast<int>(fields.size()); ++i) {
    if (fields[i].channel == channel) return i;
  }
  return -1;
}

SystemModel build_model(const Scenario& sc) { return build_model(sc, {}); }

SystemModel build_model(const Scenario& sc,
                        std::vector<LinearBlockEntry> linear_blocks) {
  validate_scenario(sc);
  SystemModel model;
  model.scenario = sc;
  model.s_base_mva = sc.s_base_mva;
  model.omega_base = 2.0 * kPi * sc.f_nom_hz;
  model.slack_bus = sc.network.slack_index();
  model.slack_x = sc.slack_internal_x;

  auto add_field = [&model](DeviceKind kind, int device, int field,
                            const std::string& name, const char* suffix) {
    StateField f;
    f.kind = kind;
    f.device = device;
    f.field = field;
    f.channel = name + "." + suffix;
    model.layout.fields.push_back(std::move(f));
  };

  for (const auto& m : sc.machines) {
    MachineEntry e;
    e.name = m.name;
    e.bus = model.scenario.network.bus_index(m.bus);
    e.p_dispatch_mw = m.p_mw;
    e.p = m.params;
    const int idx = static_cast<int>(model.machines.size());
    model.layout.machine_offset.push_back(model.layout.size());
    add_field(DeviceKind::machine, idx, 0, m.name, "delta");
    add_field(DeviceKind::machine, idx, 1, m.name, "omega");
    add_field(DeviceKind::machine, idx, 2, m.name, "eq_p");
    add_field(DeviceKind::machine, idx, 3, m.name, "ed_p");
    add_field(DeviceKind::machine, idx, 4, m.name, "x_avr");
    add_field(DeviceKind::machine, idx, 5, m.name, "x_gov");
    if (m.params.pss.enabled) {
      add_field(DeviceKind::machine, idx, 6, m.name, "x_wash");
      add_field(DeviceKind::machine, idx, 7, m.name, "x_lead");
    }
    model.machines.push_back(std::move(e));
  }

  for (const auto& g : sc.gfls) {
    GflEntry e;
    e.name = g.name;
    e.bus = model.scenario.network.bus_index(g.bus);
    e.p = g.params;
    const auto gains = pll_gains_from_bandwidth(g.params.bw_hz, g.params.zeta);
    e.kp = gains.first;
    e.ki = gains.second;
    const int idx = static_cast<int>(model.gfls.size());
    model.layout.gfl_offset.push_back(model.layout.size());
    add_field(DeviceKind::gfl, idx, 0, g.name, "x1");
    add_field(DeviceKind::gfl, idx, 1, g.name, "x2");
    add_field(DeviceKind::gfl, idx, 2, g.name, "ip");
    add_field(DeviceKind::gfl, idx, 3, g.name, "iq");
    model.gfls.push_back(std::move(e));
  }

  for (const auto& g : sc.gfms) {
    GfmEntry e;
    e.name = g.name;
    e.bus = model.scenario.network.bus_index(g.bus);
    e.p = g.params;
    const int idx = static_cast<int>(model.gfms.size());
    model.layout.gfm_offset.push_back(model.layout.size());
    add_field(DeviceKind::gfm, idx, 0, g.name, "theta");
    add_field(DeviceKind::gfm, idx, 1, g.name, "p_filt");
    add_field(DeviceKind::gfm, idx, 2, g.name, "q_filt");
    model.gfms.push_back(std::move(e));
  }

  for (const auto& l : sc.loads) {
    LoadEntry e;
    e.name = l.name;
    e.bus = model.scenario.network.bus_index(l.bus);
    e.p = l.params;
    model.loads.push_back(std::move(e));
  }

  for (const auto& ltc : sc.ltcs) {
    LtcEntry e;
    e.name = ltc.name;
    e.branch = model.scenario.network.branch_index(ltc.branch);
    e.monitored_bus = model.scenario.network.bus_index(ltc.monitored_bus);
    e.tap_initial = ltc.tap_initial;
    e.v_target0 = ltc.v_target;
    e.p = ltc.params;
    model.ltcs.push_back(std::move(e));
  }

  for (auto& block : linear_blocks) {
    if (block.a.rows() != block.a.cols() || block.a.rows() != block.x0.size()) {
      throw ConfigError("linear block " + block.name + ": shape mismatch");
    }
    const int idx = static_cast<int>(model.linear_blocks.size());
    model.layout.linear_offset.push_back(model.layout.size());
    for (int k = 0; k < block.x0.size(); ++k) {
      add_field(DeviceKind::linear, idx, k, block.name, ("x" + std::to_string(k)).c_str());
    }
    model.linear_blocks.push_back(std::move(block));
  }

  return model;
}

} // namespace phasordyn
