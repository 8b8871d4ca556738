#include "phasordyn/engine.hpp"

#include "phasordyn/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace phasordyn {

// ============================================================================
// TimeSeries / EventJournal
// ============================================================================

int TimeSeries::channel(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(names.size()); ++i) {
    if (names[i] == name) return i;
  }
  return -1;
}

std::vector<Real> TimeSeries::channel_values(int ch) const {
  std::vector<Real> out(samples());
  for (int k = 0; k < samples(); ++k) out[k] = data(ch, k);
  return out;
}

int TimeSeries::sample_at(Real time) const {
  const auto it = std::lower_bound(t.begin(), t.end(), time - 1e-9);
  if (it == t.end()) return samples() - 1;
  return static_cast<int>(it - t.begin());
}

bool EventJournal::has_kind(const std::string& kind) const {
  for (const auto& e : entries) {
    if (e.kind == kind) return true;
  }
  return false;
}

std::optional<Real> EventJournal::first_time(const std::string& kind) const {
  for (const auto& e : entries) {
    if (e.kind == kind) return e.t;
  }
  return std::nullopt;
}

std::optional<Real> EventJournal::last_time(const std::string& kind) const {
  std::optional<Real> out;
  for (const auto& e : entries) {
    if (e.kind == kind) out = e.t;
  }
  return out;
}

PhaseTrace extract_phase_trace(const TimeSeries& series, const std::string& a,
                               const std::string& b, const std::string& annotation,
                               Real t0, Real t1) {
  PhaseTrace trace;
  const int ia = series.channel(a);
  if (ia < 0) throw ConfigError("phase trace: unknown channel '" + a + "'");
  const int ib = series.channel(b);
  if (ib < 0) throw ConfigError("phase trace: unknown channel '" + b + "'");
  int iann = -1;
  if (!annotation.empty()) {
    iann = series.channel(annotation);
    if (iann < 0) throw ConfigError("phase trace: unknown channel '" + annotation + "'");
  }
  if (series.samples() < 2) throw ConfigError("phase trace: series too short");
  if (t0 == 0.0 && t1 == 0.0) {
    t1 = series.t.back();
    t0 = std::max(series.t.front(), t1 - 1.0);
  }
  if (t1 <= t0) throw ConfigError("phase trace: empty window");
  const int k0 = series.sample_at(t0);
  const int k1 = series.sample_at(t1);
  const int count = k1 - k0 + 1;
  if (count < 2) throw ConfigError("phase trace: window contains fewer than two samples");
  trace.a.resize(count);
  trace.b.resize(count);
  trace.annotation.resize(count);
  for (int k = 0; k < count; ++k) {
    trace.a[k] = series.data(ia, k0 + k);
    trace.b[k] = series.data(ib, k0 + k);
    trace.annotation[k] = iann >= 0 ? series.data(iann, k0 + k) : 0.0;
  }
  trace.name_a = a;
  trace.name_b = b;
  trace.name_annotation = annotation;
  return trace;
}

// ============================================================================
// Engine
// ============================================================================

Engine::Engine(Scenario sc) : Engine(std::move(sc), {}) {}

Engine::Engine(Scenario sc, std::vector<LinearBlockEntry> linear_blocks)
    : model_(build_model(sc, std::move(linear_blocks))) {
  net_ = model_.scenario.network;
  for (const auto& ltc : model_.ltcs) {
    net_.branches[ltc.branch].tap_ratio = ltc.tap_initial;
  }
  for (const auto& m : model_.machines) device_buses_.push_back(m.bus);
  for (const auto& g : model_.gfls) device_buses_.push_back(g.bus);
  for (const auto& g : model_.gfms) device_buses_.push_back(g.bus);
  for (const auto& l : model_.loads) device_buses_.push_back(l.bus);
  for (const auto& ltc : model_.ltcs) device_buses_.push_back(ltc.monitored_bus);
}

FastEvaluator Engine::evaluator() const {
  FastEvaluator ev;
  ev.model = &model_;
  ev.net = &net_;
  ev.lu = &lu_;
  ev.disc = &state_.discrete;
  ev.slack_e = slack_e_;
  // Tight fixed-point tolerance keeps network noise out of the derivatives.
  ev.net_opts.tolerance = 1e-11;
  ev.net_opts.max_iterations = 100;
  return ev;
}

void Engine::rebuild_network_matrices() {
  adm_ = build_admittance(net_);
  lu_.factorize(adm_, shunts_);
}

void Engine::emit_event(Real t, const std::string& kind, const std::string& payload) {
  journal_.entries.push_back({t, kind, payload});
}

void Engine::initialize() {
  if (initialized_) throw ConfigError("engine initialized twice");
  const Scenario& sc = model_.scenario;
  const int n = model_.bus_count();

  shunts_ = norton_shunts(model_);
  loads_ = voltage_loads(model_);

  state_.discrete.ltcs.clear();
  for (const auto& ltc : model_.ltcs) {
    LtcState s;
    s.tap = ltc.tap_initial;
    s.v_target = ltc.v_target0;
    state_.discrete.ltcs.push_back(s);
  }
  state_.discrete.oels.assign(model_.machines.size(), OelState{});
  state_.discrete.gfl_slow.assign(model_.gfls.size(), GflSlowState{});
  state_.discrete.branch_in_service.clear();
  for (const auto& br : net_.branches) {
    state_.discrete.branch_in_service.push_back(br.in_service ? 1 : 0);
  }
  state_.discrete.cvr_applied = false;
  event_applied_.assign(sc.events.size(), 0);

  // --- dispatch power flow ---------------------------------------------------
  PowerFlowInput pf_in;
  pf_in.p_injection = Vec::Zero(n);
  pf_in.q_injection = Vec::Zero(n);
  for (const auto& m : model_.machines) {
    pf_in.p_injection[m.bus] += m.p_dispatch_mw / model_.s_base_mva;
  }
  for (const auto& g : model_.gfls) {
    pf_in.p_injection[g.bus] += g.p.p_ref * g.p.s_rated_mva / model_.s_base_mva;
    pf_in.q_injection[g.bus] += g.p.q_ref * g.p.s_rated_mva / model_.s_base_mva;
  }
  for (const auto& g : model_.gfms) {
    pf_in.p_injection[g.bus] += g.p.p_set * g.p.s_rated_mva / model_.s_base_mva;
  }
  for (const auto& l : loads_) {
    ExponentialLoadSpec spec;
    spec.bus = l.bus;
    spec.p0 = l.p0;
    spec.q0 = l.q0;
    spec.v0 = l.v0;
    spec.alpha = l.alpha;
    spec.beta = l.beta;
    pf_in.loads.push_back(spec);
  }
  adm_ = build_admittance(net_);
  PowerFlowOptions pf_opts;
  pf_opts.tolerance = 1e-12; // keep voltage noise out of the high-gain derivatives
  pf_opts.max_iterations = 40;
  const PowerFlowSolution pf = solve_power_flow(net_, adm_, pf_in, pf_opts);

  auto load_s_at = [&](int bus) {
    Complex s(0.0, 0.0);
    for (const auto& l : loads_) {
      if (l.bus != bus) continue;
      const Real vm = std::abs(pf.v[bus]);
      s += Complex(l.p0 * std::pow(vm / l.v0, l.alpha),
                   l.q0 * std::pow(vm / l.v0, l.beta));
    }
    return s;
  };

  // Slack equivalent source reproducing the solved boundary exactly.
  {
    const int sb = model_.slack_bus;
    Complex i_dev(0.0, 0.0);
    for (int k = 0; k < n; ++k) i_dev += adm_.y(sb, k) * pf.v[k];
    const Complex v_s = pf.v[sb];
    if (std::abs(v_s) > 1e-9) {
      i_dev += std::conj(load_s_at(sb) / v_s);
    }
    slack_e_ = v_s + Complex(0.0, model_.slack_x) * i_dev;
  }

  state_.continuous = Vec::Zero(model_.layout.size());
  Vec& z = state_.continuous;

  for (std::size_t i = 0; i < model_.machines.size(); ++i) {
    auto& m = model_.machines[i];
    const Complex v_term = pf.v[m.bus];
    const Complex s_bus(pf.p_calc[m.bus], pf.q_calc[m.bus]);
    const Complex s_dev_sys = s_bus + load_s_at(m.bus);
    const Complex s_dev = s_dev_sys * model_.s_base_mva / m.p.s_rated_mva;
    const MachineInit init = init_machine(m.p, v_term, s_dev);
    const int off = model_.layout.machine_offset[i];
    z[off] = init.state.delta;
    z[off + 1] = init.state.omega;
    z[off + 2] = init.state.eq_p;
    z[off + 3] = init.state.ed_p;
    z[off + 4] = init.avr.x_avr;
    z[off + 5] = init.gov.x_gov;
    m.v_ref = init.avr.v_ref;
    m.p_ref = init.gov.p_ref;
  }

  for (std::size_t i = 0; i < model_.gfls.size(); ++i) {
    const auto& g = model_.gfls[i];
    const Complex v_term = pf.v[g.bus];
    const Real vm = std::abs(v_term);
    Complex s_dev_sys = Complex(pf.p_calc[g.bus], pf.q_calc[g.bus]) + load_s_at(g.bus);
    // A colocated grid-forming device starts at its own setpoint; the
    // grid-following unit covers the remainder of the bus injection.
    for (const auto& f : model_.gfms) {
      if (f.bus == g.bus) {
        s_dev_sys -= Complex(f.p.p_set, f.p.q_set) * f.p.s_rated_mva / model_.s_base_mva;
      }
    }
    const Complex s_dev = s_dev_sys * model_.s_base_mva / g.p.s_rated_mva;
    const Real ip = s_dev.real() / vm;
    const Real iq = s_dev.imag() / vm;
    if (std::hypot(ip, iq) > g.p.i_max + 1e-9) {
      throw NumericError("gfl " + g.name + ": dispatch requires " +
                         std::to_string(std::hypot(ip, iq)) + " pu current, above i_max");
    }
    const int off = model_.layout.gfl_offset[i];
    z[off] = 0.0;
    z[off + 1] = std::arg(v_term);
    z[off + 2] = ip;
    z[off + 3] = iq;
    auto& slow = state_.discrete.gfl_slow[i];
    slow.outer.x_q = iq - g.p.kqp * outer_voltage_error(g.p, vm);
    const GflCommands cmd = outer_commands(g.p, slow.outer.x_q, vm);
    slow.ip_cmd = cmd.ip_cmd;
    slow.iq_cmd = cmd.iq_cmd;
    if (std::abs(cmd.iq_cmd - iq) > 1e-6 || std::abs(cmd.ip_cmd - ip) > 1e-6) {
      throw NumericError("gfl " + g.name + ": command law cannot reproduce the dispatch");
    }
  }

  for (std::size_t i = 0; i < model_.gfms.size(); ++i) {
    const auto& g = model_.gfms[i];
    const Complex v_term = pf.v[g.bus];
    const Complex s_dev(g.p.p_set, 0.0); // device pu, standby reactive
    const Complex i_dev = std::abs(v_term) > 1e-9 ? std::conj(s_dev / v_term)
                                                  : Complex(0.0, 0.0);
    const Complex e_req = v_term + Complex(0.0, g.p.x_s) * i_dev;
    const int off = model_.layout.gfm_offset[i];
    z[off] = std::arg(e_req);
    z[off + 1] = g.p.p_set;
    z[off + 2] = g.p.q_set + (g.p.v_set - std::abs(e_req)) / g.p.mq;
  }

  for (std::size_t i = 0; i < model_.linear_blocks.size(); ++i) {
    const auto& block = model_.linear_blocks[i];
    const int off = model_.layout.linear_offset[i];
    z.segment(off, block.x0.size()) = block.x0;
  }

  lu_.factorize(adm_, shunts_);
  state_.bus_voltages = pf.v;
  state_.t = 0.0;
  step_index_ = 0;

  const FastEvaluator ev = evaluator();
  f_now_.resize(z.size());
  if (!ev.eval(z, state_.bus_voltages, f_now_)) {
    throw NumericError("initialization: network solve failed at the power-flow point");
  }
  const Real resid = f_now_.lpNorm<Eigen::Infinity>();
  // Linear test blocks legitimately start away from equilibrium.
  if (model_.linear_blocks.empty() && resid > 1e-8) {
    char rbuf[64];
    std::snprintf(rbuf, sizeof rbuf, "%.3g", resid);
    throw NumericError("initialization residual " + std::string(rbuf) +
                       " exceeds 1e-8; inconsistent scenario data");
  }

  series_.dt = sc.sim.dt_s;
  series_.names = channel_names();
  auto require_channel = [this](const std::string& name, const char* what) {
    if (name.empty()) return;
    if (std::find(series_.names.begin(), series_.names.end(), name) ==
        series_.names.end()) {
      throw ConfigError(std::string(what) + " '" + name + "' does not exist");
    }
  };
  require_channel(sc.outputs.detect_channel, "outputs.detect_channel");
  require_channel(sc.outputs.annotation_channel, "outputs.annotation_channel");
  for (const auto& pair : sc.outputs.phase_pairs) {
    require_channel(pair.first, "outputs.phase_pairs channel");
    require_channel(pair.second, "outputs.phase_pairs channel");
  }
  const long total_steps =
      static_cast<long>(std::ceil(sc.sim.t_end_s / sc.sim.dt_s - 1e-9));
  series_.t.clear();
  series_.t.reserve(total_steps + 1);
  series_.data.resize(static_cast<int>(series_.names.size()), total_steps + 1);
  record_sample();

  scan_ = EigenScan{};
  next_scan_t_ = sc.sim.scan_interval_s;
  if (sc.sim.eigen_scan) take_eigen_snapshot();

  chord_valid_ = false;
  terminated_ = false;
  termination_ = Termination::completed;
  initialized_ = true;
}

void Engine::refresh_chord(Real dt) {
  FastEvaluator ev = evaluator();
  ComplexVec v_warm = state_.bus_voltages;
  auto f = [&ev, &v_warm](const Vec& zz, Vec& ff) { return ev.eval(zz, v_warm, ff); };
  chord_j_ = fd_jacobian(f, state_.continuous, 1e-6, 1e-8);
  const int n = static_cast<int>(state_.continuous.size());
  Mat m = Mat::Identity(n, n) - (dt / 2.0) * chord_j_;
  chord_lu_.compute(m);
  chord_valid_ = true;
  chord_dt_ = dt;
}

bool Engine::advance_continuous(Real dt, int depth) {
  const FastEvaluator ev = evaluator();
  const Vec y = state_.continuous;
  const Vec f_n = f_now_;
  Vec f_trial(y.size());

  for (int attempt = 0; attempt < 2; ++attempt) {
    const bool want_fresh = attempt > 0;
    if (!chord_valid_ || chord_dt_ != dt || want_fresh) {
      try {
        refresh_chord(dt);
      } catch (const NumericError&) {
        break; // cannot even linearize here; fall through to the half step
      }
    }
    Vec z = y + dt * f_n;
    ComplexVec v = state_.bus_voltages;
    bool converged = false;
    for (int iter = 1; iter <= 20; ++iter) {
      ComplexVec v_it = v;
      if (!ev.eval(z, v_it, f_trial)) break;
      v = v_it;
      const Vec residual = z - y - (dt / 2.0) * (f_n + f_trial);
      const Vec delta = chord_lu_.solve(residual);
      z -= delta;
      if (delta.lpNorm<Eigen::Infinity>() < 1e-9) {
        // Re-evaluate at the accepted point so state, voltages and cached
        // derivatives stay mutually consistent.
        if (!ev.eval(z, v, f_trial)) break;
        state_.continuous = z;
        state_.bus_voltages = v;
        f_now_ = f_trial;
        last_newton_iters_ = iter;
        if (iter > 6) chord_valid_ = false;
        converged = true;
        break;
      }
    }
    if (converged) return true;
  }

  // Hard limiter boundaries (exciter ceiling, current clamps) put derivative
  // kinks inside the step; progressively halve until the chord contraction
  // beats the kink, giving up only below a 1/32 sub-step.
  if (depth < 5) {
    if (!advance_continuous(dt / 2.0, depth + 1)) return false;
    if (!advance_continuous(dt / 2.0, depth + 1)) return false;
    chord_valid_ = false;
    return true;
  }
  return false;
}

bool Engine::apply_due_events() {
  const Scenario& sc = model_.scenario;
  const Real now = state_.t;
  const Real dt = sc.sim.dt_s;

  enum Kind { k_branch = 0, k_oel = 1, k_tap = 2, k_cvr = 3, k_custom = 4 };
  struct Pending {
    Real t;
    int priority;
    int decl;
    int kind;
    int index; // scenario event / device index
    int direction = 0;
  };
  std::vector<Pending> due;

  for (std::size_t i = 0; i < sc.events.size(); ++i) {
    if (event_applied_[i]) continue;
    const auto& ev = sc.events[i];
    if (ev.t_s > now + 1e-9) continue;
    int kind = k_custom;
    if (ev.kind == "branch_trip") kind = k_branch;
    else if (ev.kind == "tap_step") kind = k_tap;
    due.push_back({ev.t_s, kind, static_cast<int>(i), kind, static_cast<int>(i), 0});
  }

  // Limiter timers run on the field current at the present state.
  for (std::size_t i = 0; i < model_.machines.size(); ++i) {
    const auto& m = model_.machines[i];
    const int off = model_.layout.machine_offset[i];
    const MachineState ms{state_.continuous[off], state_.continuous[off + 1],
                          state_.continuous[off + 2], state_.continuous[off + 3]};
    Real id = 0.0, iq = 0.0;
    machine_dq_currents(ms, m.p, state_.bus_voltages[m.bus], id, iq);
    const Real ifd = ms.eq_p + (m.p.xd - m.p.xd_p) * id;
    if (oel_update(state_.discrete.oels[i], m.p.oel, ifd, dt)) {
      due.push_back({now, k_oel, static_cast<int>(i), k_oel, static_cast<int>(i), 0});
    }
  }

  for (std::size_t i = 0; i < model_.ltcs.size(); ++i) {
    const auto& ltc = model_.ltcs[i];
    const Real v_dist = std::abs(state_.bus_voltages[ltc.monitored_bus]);
    const TapRequest req =
        ltc_update(state_.discrete.ltcs[i], ltc.p, v_dist, dt);
    if (req != TapRequest::none) {
      due.push_back({now, k_tap, static_cast<int>(i), k_tap, static_cast<int>(i),
                     req == TapRequest::raise_ratio ? +1 : -1});
    }
  }

  if (sc.cvr.enabled && !state_.discrete.cvr_applied &&
      sc.cvr.t_activate_s <= now + 1e-9) {
    due.push_back({sc.cvr.t_activate_s, k_cvr, 0, k_cvr, 0, 0});
  }

  if (due.empty()) return false;

  std::stable_sort(due.begin(), due.end(), [](const Pending& a, const Pending& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.priority != b.priority) return a.priority < b.priority;
    return a.decl < b.decl;
  });

  char buf[160];
  bool topology_dirty = false;
  for (const auto& p : due) {
    switch (p.kind) {
      case k_branch: {
        const auto& ev = sc.events[p.index];
        const bool in_service = ev.value != 0.0;
        apply_branch_event(net_, ev.target, in_service, device_buses_);
        const int bi = net_.branch_index(ev.target);
        state_.discrete.branch_in_service[bi] = in_service ? 1 : 0;
        event_applied_[p.index] = 1;
        std::snprintf(buf, sizeof buf, "branch=%s in_service=%d", ev.target.c_str(),
                      in_service ? 1 : 0);
        emit_event(now, "branch_trip", buf);
        topology_dirty = true;
        break;
      }
      case k_oel: {
        const auto& m = model_.machines[p.index];
        std::snprintf(buf, sizeof buf, "machine=%s ifd_limit=%.6g", m.name.c_str(),
                      m.p.oel.ifd_limit);
        emit_event(now, "oel_limit", buf);
        break;
      }
      case k_tap: {
        int ltc_idx = p.index;
        int direction = p.direction;
        bool scripted = false;
        if (direction == 0) { // scheduled tap_step event
          const auto& ev = sc.events[p.index];
          scripted = true;
          event_applied_[p.index] = 1;
          ltc_idx = -1;
          for (std::size_t k = 0; k < model_.ltcs.size(); ++k) {
            if (model_.ltcs[k].name == ev.target) ltc_idx = static_cast<int>(k);
          }
          direction = ev.value > 0.0 ? +1 : -1;
        }
        auto& st = state_.discrete.ltcs[ltc_idx];
        const auto& ltc = model_.ltcs[ltc_idx];
        const Real next_tap = st.tap + direction * ltc.p.step;
        if (next_tap < ltc.p.tap_min - 1e-12 || next_tap > ltc.p.tap_max + 1e-12) {
          std::snprintf(buf, sizeof buf, "ltc=%s suppressed_at_bound=1", ltc.name.c_str());
          emit_event(now, "tap_step", buf);
          break;
        }
        st.tap = next_tap;
        if (scripted) st.stepped_before = true;
        net_.branches[ltc.branch].tap_ratio = next_tap;
        std::snprintf(buf, sizeof buf, "ltc=%s tap=%.6f direction=%s", ltc.name.c_str(),
                      next_tap, direction < 0 ? "lower" : "raise");
        emit_event(now, "tap_step", buf);
        topology_dirty = true;
        break;
      }
      case k_cvr: {
        cvr_apply(state_.discrete.ltcs, sc.cvr, state_.discrete.cvr_applied);
        std::snprintf(buf, sizeof buf, "delta=%.6g", sc.cvr.delta);
        emit_event(now, "cvr_activate", buf);
        break;
      }
      default: {
        const auto& ev = sc.events[p.index];
        event_applied_[p.index] = 1;
        emit_event(now, "custom", ev.note.empty() ? ev.target : ev.note);
        break;
      }
    }
  }

  if (topology_dirty) rebuild_network_matrices();
  chord_valid_ = false;
  return true;
}

bool Engine::step() {
  if (!initialized_) throw ConfigError("engine stepped before initialize");
  if (terminated_) return false;
  const Scenario& sc = model_.scenario;
  const Real dt = sc.sim.dt_s;

  if (!advance_continuous(dt, 0)) {
    terminated_ = true;
    termination_ = Termination::collapsed;
    char buf[96];
    std::snprintf(buf, sizeof buf, "step integration failed to converge at t=%.4f",
                  state_.t + dt);
    termination_detail_ = buf;
    return false;
  }
  ++step_index_;
  state_.t = static_cast<Real>(step_index_) * dt;

  for (std::size_t i = 0; i < model_.machines.size(); ++i) {
    const int off = model_.layout.machine_offset[i];
    if (std::abs(state_.continuous[off + 1]) > 0.1) {
      record_sample();
      terminated_ = true;
      termination_ = Termination::runaway;
      char buf[96];
      std::snprintf(buf, sizeof buf, "machine %s speed runaway at t=%.4f",
                    model_.machines[i].name.c_str(), state_.t);
      termination_detail_ = buf;
      return false;
    }
  }

  const bool fired = apply_due_events();

  for (std::size_t i = 0; i < model_.gfls.size(); ++i) {
    const auto& g = model_.gfls[i];
    auto& slow = state_.discrete.gfl_slow[i];
    const GflCommands cmd = outer_control_step(
        slow.outer, g.p, std::abs(state_.bus_voltages[g.bus]), dt);
    slow.ip_cmd = cmd.ip_cmd;
    slow.iq_cmd = cmd.iq_cmd;
  }

  // Events and outer-loop updates change the frozen configuration; bring the
  // voltages and cached derivatives back in line with it.
  const FastEvaluator ev = evaluator();
  if (!ev.eval(state_.continuous, state_.bus_voltages, f_now_)) {
    terminated_ = true;
    termination_ = Termination::collapsed;
    char buf[96];
    std::snprintf(buf, sizeof buf, "network solve diverged after events at t=%.4f",
                  state_.t);
    termination_detail_ = buf;
    return false;
  }

  record_sample();

  if (sc.sim.eigen_scan && (fired || state_.t + 1e-9 >= next_scan_t_)) {
    take_eigen_snapshot();
    while (state_.t + 1e-9 >= next_scan_t_) next_scan_t_ += sc.sim.scan_interval_s;
  }

  return state_.t + 1e-9 < sc.sim.t_end_s;
}

Vec Engine::derivatives_now() {
  const FastEvaluator ev = evaluator();
  ComplexVec v = state_.bus_voltages;
  Vec dz(state_.continuous.size());
  if (!ev.eval(state_.continuous, v, dz)) {
    throw NumericError("derivative evaluation failed: network solve diverged");
  }
  return dz;
}

Mat Engine::linearize_fast(Real rel, Real abs_floor) {
  FastEvaluator ev = evaluator();
  ComplexVec v_base = state_.bus_voltages;
  Vec dz_base;
  if (!ev.eval(state_.continuous, v_base, dz_base)) {
    throw NumericError("linearize: network solve failed at the base point");
  }
  // Pin every limiter to the branch it occupies at the base point so the
  // finite differences do not straddle clamp kinks.
  const BranchLatch latch = ev.make_latch(state_.continuous, v_base);
  ev.latch = &latch;
  ComplexVec v_warm = v_base;
  auto f = [&ev, &v_warm](const Vec& zz, Vec& ff) { return ev.eval(zz, v_warm, ff); };
  Mat jac = fd_jacobian(f, state_.continuous, rel, abs_floor);

  // A frozen exciter integrator is a parameter, not a mode: drop its row and
  // column so the spectrum carries live dynamics only.
  std::vector<int> keep;
  keep.reserve(jac.rows());
  std::vector<char> frozen(jac.rows(), 0);
  for (std::size_t i = 0; i < model_.machines.size(); ++i) {
    if (latch.avr[i] != 0) frozen[model_.layout.machine_offset[i] + 4] = 1;
  }
  for (int k = 0; k < jac.rows(); ++k) {
    if (!frozen[k]) keep.push_back(k);
  }
  if (static_cast<int>(keep.size()) == jac.rows()) return jac;
  Mat reduced(keep.size(), keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    for (std::size_t c = 0; c < keep.size(); ++c) {
      reduced(r, c) = jac(keep[r], keep[c]);
    }
  }
  return reduced;
}

void Engine::take_eigen_snapshot() {
  try {
    EigenSnapshot snap;
    snap.t = state_.t;
    snap.eigenvalues = eigen_spectrum(linearize_fast());
    scan_.snapshots.push_back(std::move(snap));
  } catch (const NumericError& e) {
    emit_event(state_.t, "custom", std::string("eigen_snapshot_failed: ") + e.what());
  }
}

std::vector<std::string> Engine::channel_names() const {
  std::vector<std::string> names;
  for (const auto& f : model_.layout.fields) names.push_back(f.channel);
  for (const auto& m : model_.machines) {
    names.push_back(m.name + ".efd");
    names.push_back(m.name + ".ifd");
    names.push_back(m.name + ".pm");
    names.push_back(m.name + ".pe");
    names.push_back(m.name + ".p_mw");
    names.push_back(m.name + ".q_mvar");
  }
  for (const auto& g : model_.gfls) {
    names.push_back(g.name + ".ip_cmd");
    names.push_back(g.name + ".iq_cmd");
    names.push_back(g.name + ".p_mw");
    names.push_back(g.name + ".q_mvar");
  }
  for (const auto& g : model_.gfms) {
    names.push_back(g.name + ".e_mag");
    names.push_back(g.name + ".p_mw");
    names.push_back(g.name + ".q_mvar");
  }
  for (const auto& ltc : model_.ltcs) names.push_back(ltc.name + ".tap");
  for (const auto& bus : model_.scenario.network.buses) {
    names.push_back("bus." + bus.id + ".v_mag");
    names.push_back("bus." + bus.id + ".v_ang");
  }
  names.push_back("zone.p_mw");
  names.push_back("zone.q_mvar");
  names.push_back("zone.deficit_mw");
  return names;
}

Vec Engine::channel_values_now() {
  const Vec& z = state_.continuous;
  const ComplexVec& v = state_.bus_voltages;
  std::vector<Real> vals;
  vals.reserve(series_.names.empty() ? 64 : series_.names.size());

  for (int i = 0; i < model_.layout.size(); ++i) vals.push_back(z[i]);

  for (std::size_t i = 0; i < model_.machines.size(); ++i) {
    const auto& m = model_.machines[i];
    const int off = model_.layout.machine_offset[i];
    const MachineState ms{z[off], z[off + 1], z[off + 2], z[off + 3]};
    const Complex v_term = v[m.bus];
    Real id = 0.0, iq = 0.0;
    machine_dq_currents(ms, m.p, v_term, id, iq);
    const Real efd = std::clamp(z[off + 4], m.p.efd_min, m.p.efd_max);
    const Real pm = std::clamp(z[off + 5], 0.0, m.p.p_max);
    const Real ifd = ms.eq_p + (m.p.xd - m.p.xd_p) * id;
    const Real pe = ms.ed_p * id + ms.eq_p * iq + (m.p.xq_p - m.p.xd_p) * id * iq;
    const Real scale = m.p.s_rated_mva / model_.s_base_mva;
    const Complex s_sys =
        v_term * std::conj(machine_network_current(ms, m.p, v_term) * scale);
    vals.push_back(efd);
    vals.push_back(ifd);
    vals.push_back(pm);
    vals.push_back(pe);
    vals.push_back(s_sys.real() * model_.s_base_mva);
    vals.push_back(s_sys.imag() * model_.s_base_mva);
  }

  for (std::size_t i = 0; i < model_.gfls.size(); ++i) {
    const auto& g = model_.gfls[i];
    const int off = model_.layout.gfl_offset[i];
    PllState pll;
    pll.x2 = z[off + 1];
    CurrentControlState cc;
    cc.ip = z[off + 2];
    cc.iq = z[off + 3];
    const auto& slow = state_.discrete.gfl_slow[i];
    const Real scale = g.p.s_rated_mva / model_.s_base_mva;
    const Complex s_sys = v[g.bus] * std::conj(gfl_injection(pll, cc, scale));
    vals.push_back(slow.ip_cmd);
    vals.push_back(slow.iq_cmd);
    vals.push_back(s_sys.real() * model_.s_base_mva);
    vals.push_back(s_sys.imag() * model_.s_base_mva);
  }

  for (std::size_t i = 0; i < model_.gfms.size(); ++i) {
    const auto& g = model_.gfms[i];
    const int off = model_.layout.gfm_offset[i];
    const GfmState s{z[off], z[off + 1], z[off + 2]};
    const Real scale = g.p.s_rated_mva / model_.s_base_mva;
    const Complex s_sys = v[g.bus] * std::conj(gfm_current(g.p, s, v[g.bus]) * scale);
    vals.push_back(gfm_emag(g.p, s.q_filt));
    vals.push_back(s_sys.real() * model_.s_base_mva);
    vals.push_back(s_sys.imag() * model_.s_base_mva);
  }

  for (std::size_t i = 0; i < model_.ltcs.size(); ++i) {
    vals.push_back(state_.discrete.ltcs[i].tap);
  }

  for (int i = 0; i < model_.bus_count(); ++i) {
    vals.push_back(std::abs(v[i]));
    vals.push_back(std::arg(v[i]));
  }

  Real zone_p = 0.0, zone_q = 0.0;
  std::vector<Real> v_at_loads;
  std::vector<LoadParams> load_params;
  for (const auto& l : model_.loads) {
    const Real vm = std::abs(v[l.bus]);
    const LoadPower pw = load_power(l.p, vm);
    zone_p += pw.p_mw;
    zone_q += pw.q_mvar;
    v_at_loads.push_back(vm);
    load_params.push_back(l.p);
  }
  vals.push_back(zone_p);
  vals.push_back(zone_q);
  vals.push_back(restoration_deficit(load_params, v_at_loads));

  Vec out(static_cast<int>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) out[static_cast<int>(i)] = vals[i];
  return out;
}

void Engine::record_sample() {
  const int col = static_cast<int>(series_.t.size());
  if (col >= series_.data.cols()) {
    series_.data.conservativeResize(Eigen::NoChange, col + 256);
  }
  series_.t.push_back(state_.t);
  series_.data.col(col) = channel_values_now();
}

Real Engine::zone_load_mw(const ComplexVec& v) const {
  Real total = 0.0;
  for (const auto& l : model_.loads) {
    total += load_power(l.p, std::abs(v[l.bus])).p_mw;
  }
  return total;
}

RunArtifacts Engine::run() {
  initialize();
  while (step()) {
  }

  RunArtifacts out;
  series_.data.conservativeResize(Eigen::NoChange, static_cast<int>(series_.t.size()));
  out.series = std::move(series_);
  out.journal = journal_;
  scan_.crossings = detect_crossings(scan_.snapshots);
  out.scan = scan_;
  out.termination = termination_;
  out.termination_detail = termination_detail_;
  out.t_final = state_.t;

  // Oscillation channel: explicit choice, else the first PLL integrator,
  // else the first machine speed, else the first state.
  const auto& opt_channel = model_.scenario.outputs.detect_channel;
  if (!opt_channel.empty()) {
    if (out.series.channel(opt_channel) < 0) {
      throw ConfigError("detect_channel '" + opt_channel + "' does not exist");
    }
    out.detect_channel = opt_channel;
  } else if (!model_.gfls.empty()) {
    out.detect_channel = model_.gfls[0].name + ".x1";
  } else if (!model_.machines.empty()) {
    out.detect_channel = model_.machines[0].name + ".omega";
  } else if (!out.series.names.empty()) {
    out.detect_channel = out.series.names[0];
  }

  for (const auto& c : out.scan.crossings) {
    if (c.kind == CrossingKind::hopf && c.direction > 0) {
      out.hopf_crossing_t = c.t;
      break;
    }
  }

  const bool slow_event =
      out.journal.has_kind("tap_step") || out.journal.has_kind("oel_limit");

  const int det = out.series.channel(out.detect_channel);
  if (det >= 0 && out.series.samples() > 8) {
    const std::vector<Real> values = out.series.channel_values(det);
    const std::vector<Real>& times = out.series.t;
    LimitCycleOptions cyc_opts;
    cyc_opts.expected_period_s = model_.scenario.outputs.detect_period_s;
    const Real window = 5.0 * cyc_opts.expected_period_s;

    auto cycle_in = [&](Real t0) {
      LimitCycleReport rep;
      const int k0 = out.series.sample_at(t0);
      const int k1 = out.series.sample_at(t0 + window);
      if (k1 - k0 < 8) return rep;
      try {
        rep = detect_limit_cycle(
            std::span<const Real>(times.data() + k0, k1 - k0 + 1),
            std::span<const Real>(values.data() + k0, k1 - k0 + 1), cyc_opts);
      } catch (const ConfigError&) {
      }
      return rep;
    };

    if (out.t_final - window > out.series.t.front()) {
      out.final_cycle = cycle_in(out.t_final - window);
    }

    if (out.hopf_crossing_t) {
      for (Real t0 = std::max(*out.hopf_crossing_t, times.front());
           t0 + window <= out.t_final + 1e-9; t0 += 0.5) {
        if (cycle_in(t0).exists) {
          out.cycle_onset_t = t0;
          break;
        }
      }
    }
  }

  ClassificationInput cls;
  cls.termination = termination_;
  cls.crossings = out.scan.crossings;
  cls.sustained_cycle_after_crossing =
      out.cycle_onset_t.has_value() && out.final_cycle.exists;
  cls.slow_event_before_end = slow_event;
  out.verdict = classify_instability(cls);
  return out;
}

RunArtifacts run_scenario(const Scenario& sc) {
  Engine engine(sc);
  return engine.run();
}

} // namespace phasordyn
