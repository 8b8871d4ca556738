#pragma once

#include "phasordyn/gfl.hpp"
#include "phasordyn/gfm.hpp"
#include "phasordyn/machine.hpp"
#include "phasordyn/network.hpp"
#include "phasordyn/slowdyn.hpp"

#include <string>
#include <vector>

namespace phasordyn {

// A Scenario is the complete, serializable description of one study: network,
// devices, scheduled events, integration settings and output selection.

struct SimulationOptions {
  Real dt_s = 0.002;
  Real t_end_s = 10.0;
  int output_every = 1; // CSV decimation; in-memory series keeps every step
  bool eigen_scan = false;
  Real scan_interval_s = 5.0;

  bool operator==(const SimulationOptions&) const = default;
};

struct OutputOptions {
  std::vector<std::pair<std::string, std::string>> phase_pairs;
  std::string annotation_channel; // third column of phase traces; default zone load
  std::string detect_channel;     // oscillation detection; default first gfl x1
  Real detect_period_s = 0.2;     // expected cycle period; detection window is 5x this

  bool operator==(const OutputOptions&) const = default;
};

struct ScenarioEvent {
  Real t_s = 0.0;
  std::string kind; // branch_trip | tap_step | custom
  std::string target;
  Real value = 0.0; // branch_trip: 1/0 in service; tap_step: +1/-1 ratio direction
  std::string note;

  bool operator==(const ScenarioEvent&) const = default;
};

struct MachineConfig {
  std::string name;
  std::string bus;
  Real p_mw = 0.0; // dispatch
  MachineParams params;

  bool operator==(const MachineConfig&) const = default;
};

struct GflConfig {
  std::string name;
  std::string bus;
  GflParams params; // dispatch comes from params.p_ref * rating

  bool operator==(const GflConfig&) const = default;
};

struct GfmConfig {
  std::string name;
  std::string bus;
  GfmParams params;

  bool operator==(const GfmConfig&) const = default;
};

struct LoadConfig {
  std::string name;
  std::string bus;
  LoadParams params;

  bool operator==(const LoadConfig&) const = default;
};

struct LtcConfig {
  std::string name;
  std::string branch;
  std::string monitored_bus;
  Real tap_initial = 1.0;
  Real v_target = 1.0;
  LtcParams params;

  bool operator==(const LtcConfig&) const = default;
};

struct Scenario {
  std::string name = "scenario";
  Real s_base_mva = 100.0;
  Real f_nom_hz = 50.0;
  Real slack_internal_x = 0.02; // pu reactance behind the slack equivalent

  NetworkModel network;
  std::vector<MachineConfig> machines;
  std::vector<GflConfig> gfls;
  std::vector<GfmConfig> gfms;
  std::vector<LoadConfig> loads;
  std::vector<LtcConfig> ltcs;
  CvrSettings cvr;
  std::vector<ScenarioEvent> events;
  SimulationOptions sim;
  OutputOptions outputs;

  bool operator==(const Scenario&) const = default;
};

/// Cross-reference and range checks beyond NetworkModel::validate.
/// Throws ConfigError with the offending element named.
void validate_scenario(const Scenario& sc);

} // namespace phasordyn
