#pragma once

#include "phasordyn/scenario.hpp"

#include <string>
#include <vector>

namespace phasordyn {

// ============================================================================
// Compiled form of a Scenario: resolved indices, per-device parameter tables,
// the flat continuous-state layout and the discrete (slow) state.  The model
// is immutable during a run; only the engine mutates simulation state, and
// only between integration steps.
// ============================================================================

struct LinearBlockEntry { // test-harness device: dx/dt = a x, no bus coupling
  std::string name;
  Mat a;
  Vec x0;
};

struct MachineEntry {
  std::string name;
  int bus = -1;
  Real p_dispatch_mw = 0.0;
  MachineParams p;
  Real v_ref = 1.0; // back-solved at initialization
  Real p_ref = 0.0;
};

struct GflEntry {
  std::string name;
  int bus = -1;
  GflParams p;
  Real kp = 0.0; // resolved PLL gains
  Real ki = 0.0;
};

struct GfmEntry {
  std::string name;
  int bus = -1;
  GfmParams p;
};

struct LoadEntry {
  std::string name;
  int bus = -1;
  LoadParams p;
};

struct LtcEntry {
  std::string name;
  int branch = -1;
  int monitored_bus = -1;
  Real tap_initial = 1.0;
  Real v_target0 = 1.0;
  LtcParams p;
};

enum class DeviceKind { machine, gfl, gfm, linear };

struct StateField {
  DeviceKind kind;
  int device = 0; // index within its kind
  int field = 0;
  std::string channel; // "<device>.<field>"
};

/// Flat continuous-state layout.  Every entry maps to exactly one device
/// state field and vice versa.
struct StateLayout {
  std::vector<StateField> fields;
  std::vector<int> machine_offset; // first index of each machine's block
  std::vector<int> gfl_offset;
  std::vector<int> gfm_offset;
  std::vector<int> linear_offset;

  [[nodiscard]] int size() const { return static_cast<int>(fields.size()); }
  [[nodiscard]] int index_of(const std::string& channel) const; // -1 missing
};

struct SystemModel {
  Scenario scenario; // retained source description
  Real s_base_mva = 100.0;
  Real omega_base = 2.0 * kPi * 50.0;
  int slack_bus = -1;
  Real slack_x = 0.02;

  std::vector<MachineEntry> machines;
  std::vector<GflEntry> gfls;
  std::vector<GfmEntry> gfms;
  std::vector<LoadEntry> loads;
  std::vector<LtcEntry> ltcs;
  std::vector<LinearBlockEntry> linear_blocks;

  StateLayout layout;

  [[nodiscard]] int bus_count() const {
    return static_cast<int>(scenario.network.buses.size());
  }
};

/// Per-grid-following-device slow/piecewise state: the outer-loop integrator
/// and the commands most recently issued to the current lag.
struct GflSlowState {
  OuterControlState outer;
  Real ip_cmd = 0.0;
  Real iq_cmd = 0.0;
};

struct DiscreteState {
  std::vector<LtcState> ltcs;
  std::vector<OelState> oels;
  std::vector<GflSlowState> gfl_slow;
  std::vector<char> branch_in_service;
  bool cvr_applied = false;
};

struct SimulationState {
  Real t = 0.0;
  Vec continuous;
  DiscreteState discrete;
  ComplexVec bus_voltages;
};

/// Validate the scenario, build index tables and the state layout.
[[nodiscard]] SystemModel build_model(const Scenario& sc);

/// Variant used by tests: linear blocks are attached after the scenario
/// devices and share the integrator with everything else.
[[nodiscard]] SystemModel build_model(const Scenario& sc,
                                      std::vector<LinearBlockEntry> linear_blocks);

} // namespace phasordyn
