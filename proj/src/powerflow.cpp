#include "phasordyn/powerflow.hpp"

#include <cmath>

namespace phasordyn {

namespace {

// Net scheduled injection minus calculated injection, stacked as
// [dP at every non-slack bus, dQ at every pq bus].
struct MismatchMap {
  std::vector<int> p_rows; // bus index per P equation
  std::vector<int> q_rows; // bus index per Q equation
};

MismatchMap build_map(const NetworkModel& net) {
  MismatchMap map;
  for (int i = 0; i < static_cast<int>(net.buses.size()); ++i) {
    if (net.buses[i].kind != BusKind::slack) map.p_rows.push_back(i);
    if (net.buses[i].kind == BusKind::pq) map.q_rows.push_back(i);
  }
  return map;
}

ComplexVec assemble_voltages(const NetworkModel& net, const MismatchMap& map,
                             const Vec& u) {
  const int n = static_cast<int>(net.buses.size());
  const int np = static_cast<int>(map.p_rows.size());
  Vec theta = Vec::Zero(n);
  Vec vm(n);
  for (int i = 0; i < n; ++i) {
    vm[i] = (net.buses[i].kind == BusKind::pq) ? 1.0 : net.buses[i].v_setpoint;
  }
  for (int k = 0; k < np; ++k) theta[map.p_rows[k]] = u[k];
  for (int k = 0; k < static_cast<int>(map.q_rows.size()); ++k) {
    vm[map.q_rows[k]] = u[np + k];
  }
  ComplexVec v(n);
  for (int i = 0; i < n; ++i) v[i] = std::polar(vm[i], theta[i]);
  return v;
}

Vec mismatch(const NetworkModel& net, const AdmittanceMatrix& adm,
             const PowerFlowInput& input, const MismatchMap& map, const Vec& u) {
  const int n = static_cast<int>(net.buses.size());
  const ComplexVec v = assemble_voltages(net, map, u);
  const ComplexVec i_inj = adm.y * v;
  Vec p_sched = Vec::Zero(n);
  Vec q_sched = Vec::Zero(n);
  if (input.p_injection.size() == n) p_sched = input.p_injection;
  if (input.q_injection.size() == n) q_sched = input.q_injection;
  for (const auto& load : input.loads) {
    const Real vm = std::abs(v[load.bus]);
    p_sched[load.bus] -= load.p0 * std::pow(vm / load.v0, load.alpha);
    q_sched[load.bus] -= load.q0 * std::pow(vm / load.v0, load.beta);
  }
  Vec f(map.p_rows.size() + map.q_rows.size());
  int row = 0;
  for (int bus : map.p_rows) {
    const Complex s = v[bus] * std::conj(i_inj[bus]);
    f[row++] = p_sched[bus] - s.real();
  }
  for (int bus : map.q_rows) {
    const Complex s = v[bus] * std::conj(i_inj[bus]);
    f[row++] = q_sched[bus] - s.imag();
  }
  return f;
}

} // namespace

PowerFlowSolution solve_power_flow(const NetworkModel& net,
                                   const AdmittanceMatrix& adm,
                                   const PowerFlowInput& input,
                                   const PowerFlowOptions& opts) {
  const int n = static_cast<int>(net.buses.size());
  if (adm.dimension() != n) throw ConfigError("power flow: admittance dimension mismatch");
  if (input.p_injection.size() != 0 && input.p_injection.size() != n) {
    throw ConfigError("power flow: p_injection size mismatch");
  }
  if (input.q_injection.size() != 0 && input.q_injection.size() != n) {
    throw ConfigError("power flow: q_injection size mismatch");
  }
  for (const auto& load : input.loads) {
    if (load.bus < 0 || load.bus >= n) throw ConfigError("power flow: load bus out of range");
    if (load.v0 <= 0.0) throw ConfigError("power flow: load v0 must be positive");
  }

  const MismatchMap map = build_map(net);
  const int m = static_cast<int>(map.p_rows.size() + map.q_rows.size());
  Vec u = Vec::Zero(m); // flat start: zero angles ...
  for (int k = 0; k < static_cast<int>(map.q_rows.size()); ++k) {
    u[map.p_rows.size() + k] = 1.0; // ... and unit magnitude at pq buses
  }

  Vec f = mismatch(net, adm, input, map, u);
  int iterations = 0;
  while (f.lpNorm<Eigen::Infinity>() >= opts.tolerance) {
    if (iterations >= opts.max_iterations) {
      throw NumericError("power flow did not converge: mismatch " +
                         std::to_string(f.lpNorm<Eigen::Infinity>()) + " after " +
                         std::to_string(iterations) + " iterations");
    }
    // Central-difference Jacobian of the mismatch vector.
    Mat jac(m, m);
    for (int j = 0; j < m; ++j) {
      const Real h = 1e-6 * std::max(std::abs(u[j]), 1.0);
      Vec up = u, um = u;
      up[j] += h;
      um[j] -= h;
      jac.col(j) = (mismatch(net, adm, input, map, up) -
                    mismatch(net, adm, input, map, um)) /
                   (2.0 * h);
    }
    Eigen::FullPivLU<Mat> lu(jac);
    if (!lu.isInvertible()) {
      throw NumericError("power flow Jacobian is singular");
    }
    u -= lu.solve(f);
    if (!u.allFinite()) throw NumericError("power flow diverged (non-finite update)");
    f = mismatch(net, adm, input, map, u);
    ++iterations;
  }

  PowerFlowSolution sol;
  sol.v = assemble_voltages(net, map, u);
  const ComplexVec i_inj = adm.y * sol.v;
  sol.p_calc = Vec(n);
  sol.q_calc = Vec(n);
  for (int i = 0; i < n; ++i) {
    const Complex s = sol.v[i] * std::conj(i_inj[i]);
    sol.p_calc[i] = s.real();
    sol.q_calc[i] = s.imag();
  }
  sol.iterations = iterations;
  sol.mismatch_inf_norm = f.lpNorm<Eigen::Infinity>();
  return sol;
}

} // namespace phasordyn
