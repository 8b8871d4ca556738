#include "phasordyn/scenario_io.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace phasordyn {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ScenarioError("scenario " + path + ": " + msg);
}

void check_object(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void check_keys(const Json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  check_object(j, path);
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* key : allowed) ok = ok || item.key() == key;
    if (!ok) fail(path + "." + item.key(), "unknown key");
  }
}

Real get_num(const Json& j, const std::string& path, const char* key, Real def) {
  if (!j.contains(key)) return def;
  const Json& v = j.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<Real>();
}

Real require_num(const Json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path, std::string("missing required key '") + key + "'");
  return get_num(j, path, key, 0.0);
}

int get_int(const Json& j, const std::string& path, const char* key, int def) {
  if (!j.contains(key)) return def;
  const Json& v = j.at(key);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

bool get_bool(const Json& j, const std::string& path, const char* key, bool def) {
  if (!j.contains(key)) return def;
  const Json& v = j.at(key);
  if (!v.is_boolean()) fail(path + "." + key, "expected true or false");
  return v.get<bool>();
}

std::string get_str(const Json& j, const std::string& path, const char* key,
                    const std::string& def) {
  if (!j.contains(key)) return def;
  const Json& v = j.at(key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::string require_str(const Json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path, std::string("missing required key '") + key + "'");
  return get_str(j, path, key, {});
}

// --- device parameter blocks -------------------------------------------------

PssParams parse_pss(const Json& j, const std::string& path) {
  check_keys(j, path, {"enabled", "gain", "tw_s", "t1_s", "t2_s", "limit"});
  PssParams p;
  p.enabled = get_bool(j, path, "enabled", p.enabled);
  p.gain = get_num(j, path, "gain", p.gain);
  p.tw_s = get_num(j, path, "tw_s", p.tw_s);
  p.t1_s = get_num(j, path, "t1_s", p.t1_s);
  p.t2_s = get_num(j, path, "t2_s", p.t2_s);
  p.limit = get_num(j, path, "limit", p.limit);
  return p;
}

OelParams parse_oel(const Json& j, const std::string& path) {
  check_keys(j, path, {"enabled", "ifd_limit", "delay_s", "gain"});
  OelParams p;
  p.enabled = get_bool(j, path, "enabled", p.enabled);
  p.ifd_limit = get_num(j, path, "ifd_limit", p.ifd_limit);
  p.delay_s = get_num(j, path, "delay_s", p.delay_s);
  p.gain = get_num(j, path, "gain", p.gain);
  return p;
}

MachineParams parse_machine_params(const Json& j, const std::string& path) {
  check_keys(j, path,
             {"s_rated_mva", "h_s", "d_pu", "xd", "xq", "xd_p", "xq_p", "td0_p_s",
              "tq0_p_s", "ka", "ta_s", "efd_min", "efd_max", "droop", "tg_s",
              "p_max", "oel", "pss"});
  MachineParams p;
  p.s_rated_mva = get_num(j, path, "s_rated_mva", p.s_rated_mva);
  p.h_s = get_num(j, path, "h_s", p.h_s);
  p.d_pu = get_num(j, path, "d_pu", p.d_pu);
  p.xd = get_num(j, path, "xd", p.xd);
  p.xq = get_num(j, path, "xq", p.xq);
  p.xd_p = get_num(j, path, "xd_p", p.xd_p);
  p.xq_p = get_num(j, path, "xq_p", p.xq_p);
  p.td0_p_s = get_num(j, path, "td0_p_s", p.td0_p_s);
  p.tq0_p_s = get_num(j, path, "tq0_p_s", p.tq0_p_s);
  p.ka = get_num(j, path, "ka", p.ka);
  p.ta_s = get_num(j, path, "ta_s", p.ta_s);
  p.efd_min = get_num(j, path, "efd_min", p.efd_min);
  p.efd_max = get_num(j, path, "efd_max", p.efd_max);
  p.droop = get_num(j, path, "droop", p.droop);
  p.tg_s = get_num(j, path, "tg_s", p.tg_s);
  p.p_max = get_num(j, path, "p_max", p.p_max);
  if (j.contains("oel")) p.oel = parse_oel(j.at("oel"), path + ".oel");
  if (j.contains("pss")) p.pss = parse_pss(j.at("pss"), path + ".pss");
  return p;
}

GflParams parse_gfl_params(const Json& j, const std::string& path) {
  check_keys(j, path,
             {"s_rated_mva", "bw_hz", "zeta", "t_g_s", "i_max", "kqp", "kqi",
              "deadband", "v_ref", "p_ref", "q_ref", "priority"});
  GflParams p;
  p.s_rated_mva = get_num(j, path, "s_rated_mva", p.s_rated_mva);
  p.bw_hz = get_num(j, path, "bw_hz", p.bw_hz);
  p.zeta = get_num(j, path, "zeta", p.zeta);
  p.t_g_s = get_num(j, path, "t_g_s", p.t_g_s);
  p.i_max = get_num(j, path, "i_max", p.i_max);
  p.kqp = get_num(j, path, "kqp", p.kqp);
  p.kqi = get_num(j, path, "kqi", p.kqi);
  p.deadband = get_num(j, path, "deadband", p.deadband);
  p.v_ref = get_num(j, path, "v_ref", p.v_ref);
  p.p_ref = get_num(j, path, "p_ref", p.p_ref);
  p.q_ref = get_num(j, path, "q_ref", p.q_ref);
  const std::string prio = get_str(j, path, "priority", "q_priority");
  if (prio == "q_priority") p.priority = CurrentPriority::q_priority;
  else if (prio == "p_priority") p.priority = CurrentPriority::p_priority;
  else fail(path + ".priority", "expected 'q_priority' or 'p_priority'");
  return p;
}

GfmParams parse_gfm_params(const Json& j, const std::string& path) {
  check_keys(j, path,
             {"s_rated_mva", "mp", "mq", "t_f_s", "x_s", "i_max", "v_set", "p_set",
              "q_set"});
  GfmParams p;
  p.s_rated_mva = get_num(j, path, "s_rated_mva", p.s_rated_mva);
  p.mp = get_num(j, path, "mp", p.mp);
  p.mq = get_num(j, path, "mq", p.mq);
  p.t_f_s = get_num(j, path, "t_f_s", p.t_f_s);
  p.x_s = get_num(j, path, "x_s", p.x_s);
  p.i_max = get_num(j, path, "i_max", p.i_max);
  p.v_set = get_num(j, path, "v_set", p.v_set);
  p.p_set = get_num(j, path, "p_set", p.p_set);
  p.q_set = get_num(j, path, "q_set", p.q_set);
  return p;
}

LoadParams parse_load_params(const Json& j, const std::string& path) {
  check_keys(j, path, {"p0_mw", "q0_mvar", "v0", "alpha", "beta"});
  LoadParams p;
  p.p0_mw = get_num(j, path, "p0_mw", p.p0_mw);
  p.q0_mvar = get_num(j, path, "q0_mvar", p.q0_mvar);
  p.v0 = get_num(j, path, "v0", p.v0);
  p.alpha = get_num(j, path, "alpha", p.alpha);
  p.beta = get_num(j, path, "beta", p.beta);
  return p;
}

LtcParams parse_ltc_params(const Json& j, const std::string& path) {
  check_keys(j, path,
             {"enabled", "deadband", "delay_first_s", "delay_next_s", "step",
              "tap_min", "tap_max"});
  LtcParams p;
  p.enabled = get_bool(j, path, "enabled", p.enabled);
  p.deadband = get_num(j, path, "deadband", p.deadband);
  p.delay_first_s = get_num(j, path, "delay_first_s", p.delay_first_s);
  p.delay_next_s = get_num(j, path, "delay_next_s", p.delay_next_s);
  p.step = get_num(j, path, "step", p.step);
  p.tap_min = get_num(j, path, "tap_min", p.tap_min);
  p.tap_max = get_num(j, path, "tap_max", p.tap_max);
  return p;
}

} // namespace

Scenario parse_scenario_text(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(std::string("scenario: not valid JSON: ") + e.what());
  }
  check_keys(root, "$",
             {"name", "s_base_mva", "f_nom_hz", "slack_internal_x", "network",
              "machines", "gfls", "gfms", "loads", "ltcs", "cvr", "events", "sim",
              "outputs"});

  Scenario sc;
  sc.name = get_str(root, "$", "name", sc.name);
  sc.s_base_mva = get_num(root, "$", "s_base_mva", sc.s_base_mva);
  sc.f_nom_hz = get_num(root, "$", "f_nom_hz", sc.f_nom_hz);
  sc.slack_internal_x = get_num(root, "$", "slack_internal_x", sc.slack_internal_x);

  if (!root.contains("network")) fail("$", "missing required key 'network'");
  {
    const Json& net = root.at("network");
    check_keys(net, "$.network", {"buses", "branches"});
    if (!net.contains("buses") || !net.at("buses").is_array()) {
      fail("$.network", "missing 'buses' array");
    }
    int bi = 0;
    for (const Json& jb : net.at("buses")) {
      const std::string path = "$.network.buses[" + std::to_string(bi++) + "]";
      check_keys(jb, path, {"id", "base_kv", "kind", "v_setpoint", "p_load0", "q_load0"});
      Bus b;
      b.id = require_str(jb, path, "id");
      b.base_kv = require_num(jb, path, "base_kv");
      const std::string kind = get_str(jb, path, "kind", "pq");
      if (kind == "slack") b.kind = BusKind::slack;
      else if (kind == "pv") b.kind = BusKind::pv;
      else if (kind == "pq") b.kind = BusKind::pq;
      else fail(path + ".kind", "expected 'slack', 'pv' or 'pq'");
      b.v_setpoint = get_num(jb, path, "v_setpoint", b.v_setpoint);
      b.p_load0 = get_num(jb, path, "p_load0", b.p_load0);
      b.q_load0 = get_num(jb, path, "q_load0", b.q_load0);
      sc.network.buses.push_back(b);
    }
    int ri = 0;
    if (net.contains("branches")) {
      if (!net.at("branches").is_array()) fail("$.network.branches", "expected an array");
      for (const Json& jb : net.at("branches")) {
        const std::string path = "$.network.branches[" + std::to_string(ri++) + "]";
        check_keys(jb, path,
                   {"id", "from", "to", "r", "x", "b_shunt", "tap_ratio", "in_service"});
        Branch b;
        b.id = require_str(jb, path, "id");
        b.from = require_str(jb, path, "from");
        b.to = require_str(jb, path, "to");
        b.r = get_num(jb, path, "r", b.r);
        b.x = require_num(jb, path, "x");
        b.b_shunt = get_num(jb, path, "b_shunt", b.b_shunt);
        b.tap_ratio = get_num(jb, path, "tap_ratio", b.tap_ratio);
        b.in_service = get_bool(jb, path, "in_service", b.in_service);
        sc.network.branches.push_back(b);
      }
    }
  }

  auto parse_array = [&](const char* key, auto&& fn) {
    if (!root.contains(key)) return;
    if (!root.at(key).is_array()) fail(std::string("$.") + key, "expected an array");
    int i = 0;
    for (const Json& item : root.at(key)) {
      fn(item, std::string("$.") + key + "[" + std::to_string(i++) + "]");
    }
  };

  parse_array("machines", [&](const Json& j, const std::string& path) {
    check_keys(j, path, {"name", "bus", "p_mw", "params"});
    MachineConfig m;
    m.name = require_str(j, path, "name");
    m.bus = require_str(j, path, "bus");
    m.p_mw = get_num(j, path, "p_mw", m.p_mw);
    if (j.contains("params")) m.params = parse_machine_params(j.at("params"), path + ".params");
    sc.machines.push_back(std::move(m));
  });

  parse_array("gfls", [&](const Json& j, const std::string& path) {
    check_keys(j, path, {"name", "bus", "params"});
    GflConfig g;
    g.name = require_str(j, path, "name");
    g.bus = require_str(j, path, "bus");
    if (j.contains("params")) g.params = parse_gfl_params(j.at("params"), path + ".params");
    sc.gfls.push_back(std::move(g));
  });

  parse_array("gfms", [&](const Json& j, const std::string& path) {
    check_keys(j, path, {"name", "bus", "params"});
    GfmConfig g;
    g.name = require_str(j, path, "name");
    g.bus = require_str(j, path, "bus");
    if (j.contains("params")) g.params = parse_gfm_params(j.at("params"), path + ".params");
    sc.gfms.push_back(std::move(g));
  });

  parse_array("loads", [&](const Json& j, const std::string& path) {
    check_keys(j, path, {"name", "bus", "params"});
    LoadConfig l;
    l.name = require_str(j, path, "name");
    l.bus = require_str(j, path, "bus");
    if (j.contains("params")) l.params = parse_load_params(j.at("params"), path + ".params");
    sc.loads.push_back(std::move(l));
  });

  parse_array("ltcs", [&](const Json& j, const std::string& path) {
    check_keys(j, path,
               {"name", "branch", "monitored_bus", "tap_initial", "v_target", "params"});
    LtcConfig ltc;
    ltc.name = require_str(j, path, "name");
    ltc.branch = require_str(j, path, "branch");
    ltc.monitored_bus = require_str(j, path, "monitored_bus");
    ltc.tap_initial = get_num(j, path, "tap_initial", ltc.tap_initial);
    ltc.v_target = get_num(j, path, "v_target", ltc.v_target);
    if (j.contains("params")) ltc.params = parse_ltc_params(j.at("params"), path + ".params");
    sc.ltcs.push_back(std::move(ltc));
  });

  if (root.contains("cvr")) {
    const Json& j = root.at("cvr");
    check_keys(j, "$.cvr", {"enabled", "t_activate_s", "delta"});
    sc.cvr.enabled = get_bool(j, "$.cvr", "enabled", sc.cvr.enabled);
    sc.cvr.t_activate_s = get_num(j, "$.cvr", "t_activate_s", sc.cvr.t_activate_s);
    sc.cvr.delta = get_num(j, "$.cvr", "delta", sc.cvr.delta);
  }

  parse_array("events", [&](const Json& j, const std::string& path) {
    check_keys(j, path, {"t_s", "kind", "target", "value", "note"});
    ScenarioEvent ev;
    ev.t_s = require_num(j, path, "t_s");
    ev.kind = require_str(j, path, "kind");
    ev.target = get_str(j, path, "target", ev.target);
    ev.value = get_num(j, path, "value", ev.value);
    ev.note = get_str(j, path, "note", ev.note);
    sc.events.push_back(std::move(ev));
  });

  if (root.contains("sim")) {
    const Json& j = root.at("sim");
    check_keys(j, "$.sim",
               {"dt_s", "t_end_s", "output_every", "eigen_scan", "scan_interval_s"});
    sc.sim.dt_s = get_num(j, "$.sim", "dt_s", sc.sim.dt_s);
    sc.sim.t_end_s = get_num(j, "$.sim", "t_end_s", sc.sim.t_end_s);
    sc.sim.output_every = get_int(j, "$.sim", "output_every", sc.sim.output_every);
    sc.sim.eigen_scan = get_bool(j, "$.sim", "eigen_scan", sc.sim.eigen_scan);
    sc.sim.scan_interval_s = get_num(j, "$.sim", "scan_interval_s", sc.sim.scan_interval_s);
  }

  if (root.contains("outputs")) {
    const Json& j = root.at("outputs");
    check_keys(j, "$.outputs",
               {"phase_pairs", "annotation_channel", "detect_channel", "detect_period_s"});
    if (j.contains("phase_pairs")) {
      if (!j.at("phase_pairs").is_array()) fail("$.outputs.phase_pairs", "expected an array");
      int i = 0;
      for (const Json& pair : j.at("phase_pairs")) {
        const std::string path = "$.outputs.phase_pairs[" + std::to_string(i++) + "]";
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
            !pair[1].is_string()) {
          fail(path, "expected a pair of channel names");
        }
        sc.outputs.phase_pairs.push_back(
            {pair[0].get<std::string>(), pair[1].get<std::string>()});
      }
    }
    sc.outputs.annotation_channel =
        get_str(j, "$.outputs", "annotation_channel", sc.outputs.annotation_channel);
    sc.outputs.detect_channel =
        get_str(j, "$.outputs", "detect_channel", sc.outputs.detect_channel);
    sc.outputs.detect_period_s =
        get_num(j, "$.outputs", "detect_period_s", sc.outputs.detect_period_s);
  }

  try {
    validate_scenario(sc);
  } catch (const ScenarioError&) {
    throw;
  } catch (const ConfigError& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("scenario: cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str());
}

std::string dump_scenario_text(const Scenario& sc) {
  Json root;
  root["name"] = sc.name;
  root["s_base_mva"] = sc.s_base_mva;
  root["f_nom_hz"] = sc.f_nom_hz;
  root["slack_internal_x"] = sc.slack_internal_x;

  Json buses = Json::array();
  for (const auto& b : sc.network.buses) {
    Json jb;
    jb["id"] = b.id;
    jb["base_kv"] = b.base_kv;
    jb["kind"] = b.kind == BusKind::slack ? "slack" : (b.kind == BusKind::pv ? "pv" : "pq");
    jb["v_setpoint"] = b.v_setpoint;
    jb["p_load0"] = b.p_load0;
    jb["q_load0"] = b.q_load0;
    buses.push_back(jb);
  }
  Json branches = Json::array();
  for (const auto& b : sc.network.branches) {
    Json jb;
    jb["id"] = b.id;
    jb["from"] = b.from;
    jb["to"] = b.to;
    jb["r"] = b.r;
    jb["x"] = b.x;
    jb["b_shunt"] = b.b_shunt;
    jb["tap_ratio"] = b.tap_ratio;
    jb["in_service"] = b.in_service;
    branches.push_back(jb);
  }
  root["network"] = Json{{"buses", buses}, {"branches", branches}};

  Json machines = Json::array();
  for (const auto& m : sc.machines) {
    Json jm;
    jm["name"] = m.name;
    jm["bus"] = m.bus;
    jm["p_mw"] = m.p_mw;
    Json jp;
    jp["s_rated_mva"] = m.params.s_rated_mva;
    jp["h_s"] = m.params.h_s;
    jp["d_pu"] = m.params.d_pu;
    jp["xd"] = m.params.xd;
    jp["xq"] = m.params.xq;
    jp["xd_p"] = m.params.xd_p;
    jp["xq_p"] = m.params.xq_p;
    jp["td0_p_s"] = m.params.td0_p_s;
    jp["tq0_p_s"] = m.params.tq0_p_s;
    jp["ka"] = m.params.ka;
    jp["ta_s"] = m.params.ta_s;
    jp["efd_min"] = m.params.efd_min;
    jp["efd_max"] = m.params.efd_max;
    jp["droop"] = m.params.droop;
    jp["tg_s"] = m.params.tg_s;
    jp["p_max"] = m.params.p_max;
    jp["oel"] = Json{{"enabled", m.params.oel.enabled},
                     {"ifd_limit", m.params.oel.ifd_limit},
                     {"delay_s", m.params.oel.delay_s},
                     {"gain", m.params.oel.gain}};
    jp["pss"] = Json{{"enabled", m.params.pss.enabled},
                     {"gain", m.params.pss.gain},
                     {"tw_s", m.params.pss.tw_s},
                     {"t1_s", m.params.pss.t1_s},
                     {"t2_s", m.params.pss.t2_s},
                     {"limit", m.params.pss.limit}};
    jm["params"] = jp;
    machines.push_back(jm);
  }
  root["machines"] = machines;

  Json gfls = Json::array();
  for (const auto& g : sc.gfls) {
    Json jg;
    jg["name"] = g.name;
    jg["bus"] = g.bus;
    Json jp;
    jp["s_rated_mva"] = g.params.s_rated_mva;
    jp["bw_hz"] = g.params.bw_hz;
    jp["zeta"] = g.params.zeta;
    jp["t_g_s"] = g.params.t_g_s;
    jp["i_max"] = g.params.i_max;
    jp["kqp"] = g.params.kqp;
    jp["kqi"] = g.params.kqi;
    jp["deadband"] = g.params.deadband;
    jp["v_ref"] = g.params.v_ref;
    jp["p_ref"] = g.params.p_ref;
    jp["q_ref"] = g.params.q_ref;
    jp["priority"] =
        g.params.priority == CurrentPriority::q_priority ? "q_priority" : "p_priority";
    jg["params"] = jp;
    gfls.push_back(jg);
  }
  root["gfls"] = gfls;

  Json gfms = Json::array();
  for (const auto& g : sc.gfms) {
    Json jg;
    jg["name"] = g.name;
    jg["bus"] = g.bus;
    Json jp;
    jp["s_rated_mva"] = g.params.s_rated_mva;
    jp["mp"] = g.params.mp;
    jp["mq"] = g.params.mq;
    jp["t_f_s"] = g.params.t_f_s;
    jp["x_s"] = g.params.x_s;
    jp["i_max"] = g.params.i_max;
    jp["v_set"] = g.params.v_set;
    jp["p_set"] = g.params.p_set;
    jp["q_set"] = g.params.q_set;
    jg["params"] = jp;
    gfms.push_back(jg);
  }
  root["gfms"] = gfms;

  Json loads = Json::array();
  for (const auto& l : sc.loads) {
    Json jl;
    jl["name"] = l.name;
    jl["bus"] = l.bus;
    jl["params"] = Json{{"p0_mw", l.params.p0_mw},
                        {"q0_mvar", l.params.q0_mvar},
                        {"v0", l.params.v0},
                        {"alpha", l.params.alpha},
                        {"beta", l.params.beta}};
    loads.push_back(jl);
  }
  root["loads"] = loads;

  Json ltcs = Json::array();
  for (const auto& ltc : sc.ltcs) {
    Json jl;
    jl["name"] = ltc.name;
    jl["branch"] = ltc.branch;
    jl["monitored_bus"] = ltc.monitored_bus;
    jl["tap_initial"] = ltc.tap_initial;
    jl["v_target"] = ltc.v_target;
    jl["params"] = Json{{"enabled", ltc.params.enabled},
                        {"deadband", ltc.params.deadband},
                        {"delay_first_s", ltc.params.delay_first_s},
                        {"delay_next_s", ltc.params.delay_next_s},
                        {"step", ltc.params.step},
                        {"tap_min", ltc.params.tap_min},
                        {"tap_max", ltc.params.tap_max}};
    ltcs.push_back(jl);
  }
  root["ltcs"] = ltcs;

  root["cvr"] = Json{{"enabled", sc.cvr.enabled},
                     {"t_activate_s", sc.cvr.t_activate_s},
                     {"delta", sc.cvr.delta}};

  Json events = Json::array();
  for (const auto& ev : sc.events) {
    Json je;
    je["t_s"] = ev.t_s;
    je["kind"] = ev.kind;
    je["target"] = ev.target;
    je["value"] = ev.value;
    je["note"] = ev.note;
    events.push_back(je);
  }
  root["events"] = events;

  root["sim"] = Json{{"dt_s", sc.sim.dt_s},
                     {"t_end_s", sc.sim.t_end_s},
                     {"output_every", sc.sim.output_every},
                     {"eigen_scan", sc.sim.eigen_scan},
                     {"scan_interval_s", sc.sim.scan_interval_s}};

  Json pairs = Json::array();
  for (const auto& p : sc.outputs.phase_pairs) {
    pairs.push_back(Json::array({p.first, p.second}));
  }
  root["outputs"] = Json{{"phase_pairs", pairs},
                         {"annotation_channel", sc.outputs.annotation_channel},
                         {"detect_channel", sc.outputs.detect_channel},
                         {"detect_period_s", sc.outputs.detect_period_s}};

  return root.dump(2) + "\n";
}

void save_scenario_file(const Scenario& sc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("scenario: cannot write '" + path + "'");
  out << dump_scenario_text(sc);
}

} // namespace phasordyn
