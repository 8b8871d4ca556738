#include "phasordyn/evaluator.hpp"

#include <cmath>

namespace phasordyn {

std::vector<NortonShunt> norton_shunts(const SystemModel& model) {
  std::vector<NortonShunt> shunts;
  shunts.push_back({model.slack_bus, Real(1) / Complex(0.0, model.slack_x)});
  for (const auto& m : model.machines) {
    const Real scale = m.p.s_rated_mva / model.s_base_mva;
    shunts.push_back({m.bus, scale / Complex(0.0, m.p.xd_p)});
  }
  for (const auto& g : model.gfms) {
    const Real scale = g.p.s_rated_mva / model.s_base_mva;
    shunts.push_back({g.bus, scale / Complex(0.0, g.p.x_s)});
  }
  return shunts;
}

std::vector<VoltageLoad> voltage_loads(const SystemModel& model) {
  std::vector<VoltageLoad> loads;
  for (const auto& l : model.loads) {
    VoltageLoad vl;
    vl.bus = l.bus;
    vl.p0 = l.p.p0_mw / model.s_base_mva;
    vl.q0 = l.p.q0_mvar / model.s_base_mva;
    vl.v0 = l.p.v0;
    vl.alpha = l.p.alpha;
    vl.beta = l.p.beta;
    loads.push_back(vl);
  }
  for (int i = 0; i < model.bus_count(); ++i) {
    const Bus& bus = model.scenario.network.buses[i];
    if (bus.p_load0 != 0.0 || bus.q_load0 != 0.0) {
      VoltageLoad vl;
      vl.bus = i;
      vl.p0 = bus.p_load0 / model.s_base_mva;
      vl.q0 = bus.q_load0 / model.s_base_mva;
      vl.v0 = 1.0;
      vl.alpha = 0.0;
      vl.beta = 0.0;
      loads.push_back(vl);
    }
  }
  return loads;
}

namespace {

// Per-evaluation view of the grid-forming devices as current-limited sources.
void gfm_sources(const SystemModel& model, const Vec& z,
                 std::vector<CurrentLimitedSource>& out) {
  out.clear();
  for (std::size_t i = 0; i < model.gfms.size(); ++i) {
    const auto& g = model.gfms[i];
    const int off = model.layout.gfm_offset[i];
    GfmState s{z[off], z[off + 1], z[off + 2]};
    CurrentLimitedSource src;
    src.bus = g.bus;
    src.e = gfm_internal_voltage(g.p, s);
    src.y_device = Real(1) / Complex(0.0, g.p.x_s);
    src.i_max = g.p.i_max;
    src.scale = g.p.s_rated_mva / model.s_base_mva;
    out.push_back(src);
  }
}

} // namespace

void FastEvaluator::fixed_injections(const Vec& z, ComplexVec& j) const {
  const int n = model->bus_count();
  j = ComplexVec::Zero(n);
  j[model->slack_bus] += slack_e / Complex(0.0, model->slack_x);
  for (std::size_t i = 0; i < model->machines.size(); ++i) {
    const auto& m = model->machines[i];
    const int off = model->layout.machine_offset[i];
    const MachineState ms{z[off], z[off + 1], z[off + 2], z[off + 3]};
    const Complex e_p = Complex(ms.ed_p, ms.eq_p) * std::polar(1.0, ms.delta - kPi / 2.0);
    const Real scale = m.p.s_rated_mva / model->s_base_mva;
    j[m.bus] += e_p * scale / Complex(0.0, m.p.xd_p);
  }
  for (std::size_t i = 0; i < model->gfls.size(); ++i) {
    const auto& g = model->gfls[i];
    const int off = model->layout.gfl_offset[i];
    PllState pll;
    pll.x1 = z[off];
    pll.x2 = z[off + 1];
    CurrentControlState cc;
    cc.ip = z[off + 2];
    cc.iq = z[off + 3];
    j[g.bus] += gfl_injection(pll, cc, g.p.s_rated_mva / model->s_base_mva);
  }
}

bool FastEvaluator::solve_v(const Vec& z, ComplexVec& v) const {
  ComplexVec j_fixed;
  fixed_injections(z, j_fixed);
  std::vector<CurrentLimitedSource> limited;
  gfm_sources(*model, z, limited);
  const auto loads = voltage_loads(*model);
  const auto result = solve_network(*lu, j_fixed, loads, limited, v, net_opts);
  return result.converged;
}

bool FastEvaluator::eval(const Vec& z, ComplexVec& v, Vec& dz) const {
  if (!solve_v(z, v)) return false;
  dz.resize(z.size());

  for (std::size_t i = 0; i < model->machines.size(); ++i) {
    const auto& m = model->machines[i];
    const int off = model->layout.machine_offset[i];
    const MachineState ms{z[off], z[off + 1], z[off + 2], z[off + 3]};
    const AvrState avr{z[off + 4], m.v_ref};
    const GovState gov{z[off + 5], m.p_ref};
    const Complex v_term = v[m.bus];
    Real pss_sig = 0.0;
    if (m.p.pss.enabled) {
      const PssState pss{z[off + 6], z[off + 7]};
      pss_sig = pss_output(m.p.pss, pss, ms.omega);
    }
    // ifd needed by the limiter loop before we can form the exciter equation.
    Real id = 0.0, iq = 0.0;
    machine_dq_currents(ms, m.p, v_term, id, iq);
    const Real ifd = ms.eq_p + (m.p.xd - m.p.xd_p) * id;
    const auto ag = avr_gov_derivatives(avr, gov, m.p, disc->oels[i].status,
                                        std::abs(v_term), ifd, pss_sig, ms.omega);
    Real efd_use = ag.efd;
    Real d_x_avr_use = ag.d_x_avr;
    if (latch && latch->avr[i] != 0) {
      // Frozen exciter integrator: hold the field voltage constant so the
      // state behaves as a parameter under perturbation.
      efd_use = latch->avr[i] > 0 ? m.p.efd_max : m.p.efd_min;
      d_x_avr_use = 0.0;
    }
    const auto md = machine_derivatives(ms, m.p, v_term, efd_use, ag.pm,
                                        model->omega_base);
    dz[off] = md.d_delta;
    dz[off + 1] = md.d_omega;
    dz[off + 2] = md.d_eq_p;
    dz[off + 3] = md.d_ed_p;
    dz[off + 4] = d_x_avr_use;
    dz[off + 5] = ag.d_x_gov;
    if (m.p.pss.enabled) {
      const PssState pss{z[off + 6], z[off + 7]};
      pss_derivatives(m.p.pss, pss, ms.omega, dz[off + 6], dz[off + 7]);
    }
  }

  for (std::size_t i = 0; i < model->gfls.size(); ++i) {
    const auto& g = model->gfls[i];
    const int off = model->layout.gfl_offset[i];
    PllState pll;
    pll.x1 = z[off];
    pll.x2 = z[off + 1];
    pll.kp = g.kp;
    pll.ki = g.ki;
    CurrentControlState cc;
    cc.ip = z[off + 2];
    cc.iq = z[off + 3];
    // Commands re-derived from the frozen outer integrator and the live
    // voltage, so the constant-power coupling shows up in linearizations.
    const Real vg = std::abs(v[g.bus]);
    const GflCommands cmd =
        latch ? outer_commands_on_branch(g.p, disc->gfl_slow[i].outer.x_q, vg,
                                         latch->gfl_ip[i], latch->gfl_iq[i])
              : outer_commands(g.p, disc->gfl_slow[i].outer.x_q, vg);
    cc.ip_cmd = cmd.ip_cmd;
    cc.iq_cmd = cmd.iq_cmd;
    const auto pd = pll_derivatives(pll, v[g.bus]);
    const auto cd = current_control_derivatives(cc, g.p.t_g_s);
    dz[off] = pd.first;
    dz[off + 1] = pd.second;
    dz[off + 2] = cd.first;
    dz[off + 3] = cd.second;
  }

  for (std::size_t i = 0; i < model->gfms.size(); ++i) {
    const auto& g = model->gfms[i];
    const int off = model->layout.gfm_offset[i];
    const GfmState s{z[off], z[off + 1], z[off + 2]};
    const auto gd = gfm_derivatives(g.p, s, v[g.bus], model->omega_base);
    dz[off] = gd.d_theta;
    dz[off + 1] = gd.d_p_filt;
    dz[off + 2] = gd.d_q_filt;
  }

  for (std::size_t i = 0; i < model->linear_blocks.size(); ++i) {
    const auto& block = model->linear_blocks[i];
    const int off = model->layout.linear_offset[i];
    const int n = static_cast<int>(block.x0.size());
    dz.segment(off, n) = block.a * z.segment(off, n);
  }

  return true;
}

BranchLatch FastEvaluator::make_latch(const Vec& z, const ComplexVec& v) const {
  BranchLatch out;
  out.avr.assign(model->machines.size(), 0);
  out.gfl_ip.assign(model->gfls.size(), 0);
  out.gfl_iq.assign(model->gfls.size(), 0);

  for (std::size_t i = 0; i < model->machines.size(); ++i) {
    const auto& m = model->machines[i];
    const int off = model->layout.machine_offset[i];
    const MachineState ms{z[off], z[off + 1], z[off + 2], z[off + 3]};
    const Real x_avr = z[off + 4];
    const Complex v_term = v[m.bus];
    Real id = 0.0, iq = 0.0;
    machine_dq_currents(ms, m.p, v_term, id, iq);
    const Real ifd = ms.eq_p + (m.p.xd - m.p.xd_p) * id;
    Real pss_sig = 0.0;
    if (m.p.pss.enabled) {
      const PssState pss{z[off + 6], z[off + 7]};
      pss_sig = pss_output(m.p.pss, pss, ms.omega);
    }
    Real push = 0.0; // unconstrained integrator direction
    if (disc->oels[i].status == OelStatus::limiting) {
      push = m.p.oel.gain * (m.p.oel.ifd_limit - ifd);
    } else {
      push = (-x_avr + m.p.ka * (m.v_ref - std::abs(v_term) + pss_sig)) / m.p.ta_s;
    }
    if (x_avr >= m.p.efd_max - 1e-12 && push >= 0.0) out.avr[i] = +1;
    else if (x_avr <= m.p.efd_min + 1e-12 && push <= 0.0) out.avr[i] = -1;
  }

  for (std::size_t i = 0; i < model->gfls.size(); ++i) {
    const auto& g = model->gfls[i];
    const Real vg = std::abs(v[g.bus]);
    const Real x_q = disc->gfl_slow[i].outer.x_q;
    const GflCommands cmd = outer_commands(g.p, x_q, vg);
    const Real err = outer_voltage_error(g.p, vg);
    const Real iq_raw = x_q + g.p.kqp * err;
    const Real ip_raw = g.p.p_ref / std::max(vg, 0.1);
    const Real eps = 1e-12;
    out.gfl_ip[i] = cmd.ip_cmd < ip_raw - eps ? +1 : cmd.ip_cmd > ip_raw + eps ? -1 : 0;
    out.gfl_iq[i] = cmd.iq_cmd < iq_raw - eps ? +1 : cmd.iq_cmd > iq_raw + eps ? -1 : 0;
  }
  return out;
}

Real FastEvaluator::kirchhoff_residual(const Vec& z, const ComplexVec& v) const {
  ComplexVec j;
  fixed_injections(z, j);
  const auto loads = voltage_loads(*model);
  for (const auto& load : loads) {
    j[load.bus] -= load_current(load, v[load.bus]);
  }
  std::vector<CurrentLimitedSource> limited;
  gfm_sources(*model, z, limited);
  for (const auto& src : limited) {
    j[src.bus] += limited_source_current(src, v[src.bus]) +
                  src.y_device * src.scale * v[src.bus];
  }
  return (lu->y_aug * v - j).lpNorm<Eigen::Infinity>();
}

} // namespace phasordyn
