#pragma once

#include "phasordyn/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace phasordyn {

// ============================================================================
// Bus / branch data and the dense bus admittance matrix.
//
// Conventions: impedances and shunts in per unit on the system MVA base,
// voltages in per unit, tap ratio on the from side of a branch.  All storage
// is dense; the systems this tool targets stay well below a few hundred buses.
// ============================================================================

enum class BusKind { slack, pv, pq };

struct Bus {
  std::string id;
  Real base_kv = 0.0;
  BusKind kind = BusKind::pq;
  Real v_setpoint = 1.0; // pu target, used by slack and pv buses
  Real p_load0 = 0.0;    // MW, static constant-power load at the bus
  Real q_load0 = 0.0;    // MVAr

  bool operator==(const Bus&) const = default;
};

struct Branch {
  std::string id;
  std::string from;
  std::string to;
  Real r = 0.0;
  Real x = 0.0;
  Real b_shunt = 0.0;   // total line charging, split half per end
  Real tap_ratio = 1.0; // from-side ratio
  bool in_service = true;

  bool operator==(const Branch&) const = default;
};

struct NetworkModel {
  std::vector<Bus> buses;
  std::vector<Branch> branches;

  [[nodiscard]] int bus_index(const std::string& id) const;
  [[nodiscard]] int branch_index(const std::string& id) const;
  [[nodiscard]] int slack_index() const;

  /// Structural checks: unique ids, valid endpoints, exactly one slack,
  /// nonzero series impedance, tap within [0.8, 1.2].  Throws ConfigError.
  void validate() const;

  bool operator==(const NetworkModel&) const = default;
};

struct AdmittanceMatrix {
  ComplexMat y;
  [[nodiscard]] int dimension() const { return static_cast<int>(y.rows()); }
};

/// Assemble the dense bus admittance matrix from in-service branches.
/// Entries follow the usual convention: off-diagonal Y_ij = -y_series/t,
/// from-side diagonal picks up y_series/t^2.
[[nodiscard]] AdmittanceMatrix build_admittance(const NetworkModel& net);

/// Toggle a branch in or out of service.  `must_stay_connected` lists bus
/// indices that have to remain in the slack's island afterwards; violating
/// that (or an unknown id) throws ConfigError and leaves the model unchanged.
void apply_branch_event(NetworkModel& net, const std::string& branch_id,
                        bool in_service,
                        std::span<const int> must_stay_connected = {});

/// Bus indices reachable from `start` over in-service branches.
[[nodiscard]] std::vector<int> connected_component(const NetworkModel& net, int start);

} // namespace phasordyn
