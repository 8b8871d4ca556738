#include "phasordyn/network.hpp"

#include <algorithm>
#include <set>

namespace phasordyn {

int NetworkModel::bus_index(const std::string& id) const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == id) return static_cast<int>(i);
  return -1;
}

int NetworkModel::branch_index(const std::string& id) const {
  for (std::size_t i = 0; i < branches.size(); ++i)
    if (branches[i].id == id) return static_cast<int>(i);
  return -1;
}

int NetworkModel::slack_index() const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].kind == BusKind::slack) return static_cast<int>(i);
  return -1;
}

void NetworkModel::validate() const {
  std::set<std::string> seen;
  int slacks = 0;
  for (const Bus& b : buses) {
    if (b.id.empty()) throw ConfigError("bus with empty id");
    if (!seen.insert(b.id).second) throw ConfigError("duplicate bus id '" + b.id + "'");
    if (b.base_kv <= 0.0) throw ConfigError("bus '" + b.id + "': base_kv must be positive");
    if (b.kind != BusKind::pq && (b.v_setpoint < 0.8 || b.v_setpoint > 1.2))
      throw ConfigError("bus '" + b.id + "': v_setpoint outside [0.8, 1.2]");
    if (b.kind == BusKind::slack) ++slacks;
  }
  if (slacks != 1) throw ConfigError("network needs exactly one slack bus");

  std::set<std::string> bseen;
  for (const Branch& br : branches) {
    if (br.id.empty()) throw ConfigError("branch with empty id");
    if (!bseen.insert(br.id).second) throw ConfigError("duplicate branch id '" + br.id + "'");
    if (bus_index(br.from) < 0)
      throw ConfigError("branch '" + br.id + "': unknown from bus '" + br.from + "'");
    if (bus_index(br.to) < 0)
      throw ConfigError("branch '" + br.id + "': unknown to bus '" + br.to + "'");
    if (br.from == br.to) throw ConfigError("branch '" + br.id + "': from == to");
    if (br.r == 0.0 && br.x == 0.0)
      throw ConfigError("branch '" + br.id + "': zero series impedance");
    if (br.tap_ratio < 0.8 || br.tap_ratio > 1.2)
      throw ConfigError("branch '" + br.id + "': tap_ratio outside [0.8, 1.2]");
  }
}

AdmittanceMatrix build_admittance(const NetworkModel& net) {
  const int n = static_cast<int>(net.buses.size());
  AdmittanceMatrix adm;
  adm.y = ComplexMat::Zero(n, n);
  for (const Branch& br : net.branches) {
    if (!br.in_service) continue;
    const int f = net.bus_index(br.from);
    const int t = net.bus_index(br.to);
    const Complex y_series = Real(1) / Complex(br.r, br.x);
    const Complex y_half(0.0, br.b_shunt / 2.0);
    const Real a = br.tap_ratio;
    adm.y(f, f) += (y_series + y_half) / (a * a);
    adm.y(t, t) += y_series + y_half;
    adm.y(f, t) -= y_series / a;
    adm.y(t, f) -= y_series / a;
  }
  return adm;
}

std::vector<int> connected_component(const NetworkModel& net, int start) {
  const int n = static_cast<int>(net.buses.size());
  std::vector<char> visited(n, 0);
  std::vector<int> stack{start};
  visited[start] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (const Branch& br : net.branches) {
      if (!br.in_service) continue;
      const int f = net.bus_index(br.from);
      const int t = net.bus_index(br.to);
      int other = -1;
      if (f == u) other = t;
      else if (t == u) other = f;
      if (other >= 0 && !visited[other]) {
        visited[other] = 1;
        stack.push_back(other);
      }
    }
  }
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (visited[i]) out.push_back(i);
  return out;
}

void apply_branch_event(NetworkModel& net, const std::string& branch_id,
                        bool in_service, std::span<const int> must_stay_connected) {
  const int bi = net.branch_index(branch_id);
  if (bi < 0) throw ConfigError("branch event references unknown branch '" + branch_id + "'");
  const bool before = net.branches[bi].in_service;
  net.branches[bi].in_service = in_service;
  if (!in_service && !must_stay_connected.empty()) {
    const auto island = connected_component(net, net.slack_index());
    for (int bus : must_stay_connected) {
      if (std::find(island.begin(), island.end(), bus) == island.end()) {
        net.branches[bi].in_service = before;
        throw ConfigError("tripping branch '" + branch_id +
                          "' would island bus '" + net.buses[bus].id + "' from the slack");
      }
    }
  }
}

} // namespace phasordyn
