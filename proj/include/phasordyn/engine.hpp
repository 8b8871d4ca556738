#pragma once

#include "phasordyn/analysis.hpp"
#include "phasordyn/evaluator.hpp"
#include "phasordyn/model.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace phasordyn {

// ============================================================================
// Quasi-steady-state time-domain engine: simultaneous-implicit trapezoidal
// integration of the continuous states with the algebraic network re-solved
// inside every correction, and discrete slow dynamics (taps, limiters, CVR,
// scheduled switching) processed at step boundaries in a fixed priority order.
// ============================================================================

struct TimeSeries {
  Real dt = 0.0;
  std::vector<Real> t;
  std::vector<std::string> names;
  Mat data; // channels x samples

  [[nodiscard]] int channel(const std::string& name) const; // -1 when absent
  [[nodiscard]] int samples() const { return static_cast<int>(t.size()); }
  [[nodiscard]] Real value(int ch, int sample) const { return data(ch, sample); }

  /// Contiguous view of one channel across all samples.
  [[nodiscard]] std::vector<Real> channel_values(int ch) const;

  /// First sample index with t >= time (clamped to the last sample).
  [[nodiscard]] int sample_at(Real time) const;
};

struct JournalEntry {
  Real t = 0.0;
  std::string kind;
  std::string payload;
};

struct EventJournal {
  std::vector<JournalEntry> entries;

  [[nodiscard]] bool has_kind(const std::string& kind) const;
  [[nodiscard]] std::optional<Real> first_time(const std::string& kind) const;
  [[nodiscard]] std::optional<Real> last_time(const std::string& kind) const;
};

struct RunArtifacts {
  TimeSeries series;
  EventJournal journal;
  EigenScan scan;
  Verdict verdict = Verdict::stable;
  Termination termination = Termination::completed;
  Real t_final = 0.0;
  std::string termination_detail;
  // classification evidence
  std::optional<Real> hopf_crossing_t;
  std::optional<Real> cycle_onset_t;
  LimitCycleReport final_cycle;
  std::string detect_channel;
};

class Engine {
 public:
  explicit Engine(Scenario sc);
  Engine(Scenario sc, std::vector<LinearBlockEntry> linear_blocks);

  /// Power flow plus steady-state device back-solve.  After this every
  /// continuous derivative is below 1e-8 in magnitude.
  void initialize();

  /// Advance one dt: trapezoidal step (with one half-step retry), then due
  /// events, discrete device logic and the outer-loop update.
  /// Returns false when the step signals collapse or machine runaway.
  bool step();

  /// initialize + step loop + classification.
  [[nodiscard]] RunArtifacts run();

  [[nodiscard]] const SystemModel& model() const { return model_; }
  [[nodiscard]] const SimulationState& state() const { return state_; }
  [[nodiscard]] const EventJournal& journal() const { return journal_; }
  [[nodiscard]] const NetworkModel& live_network() const { return net_; }
  [[nodiscard]] Termination termination() const { return termination_; }
  [[nodiscard]] const std::string& termination_detail() const { return termination_detail_; }

  /// Evaluator frozen at the current slow configuration.
  [[nodiscard]] FastEvaluator evaluator() const;

  /// Derivatives at the current state (network re-solved); throws on divergence.
  [[nodiscard]] Vec derivatives_now();

  /// Frozen-slow Jacobian of the fast subsystem at the current state.
  [[nodiscard]] Mat linearize_fast(Real rel = 1e-6, Real abs_floor = 1e-8);

  [[nodiscard]] std::vector<std::string> channel_names() const;
  [[nodiscard]] Vec channel_values_now();

 private:
  void rebuild_network_matrices();
  bool apply_due_events(); // true when anything fired
  void emit_event(Real t, const std::string& kind, const std::string& payload);
  bool advance_continuous(Real dt, int depth);
  void refresh_chord(Real dt);
  void record_sample();
  void take_eigen_snapshot();
  Real zone_load_mw(const ComplexVec& v) const;

  SystemModel model_;
  NetworkModel net_; // working copy with taps/breaker states applied
  AdmittanceMatrix adm_;
  NetworkLu lu_;
  std::vector<NortonShunt> shunts_;
  std::vector<VoltageLoad> loads_;
  Complex slack_e_;

  SimulationState state_;
  Vec f_now_; // derivatives at state_.continuous, kept consistent
  long step_index_ = 0;
  bool initialized_ = false;
  bool terminated_ = false;

  // chord-Newton workspace
  Mat chord_j_;
  Eigen::PartialPivLU<Mat> chord_lu_;
  bool chord_valid_ = false;
  Real chord_dt_ = 0.0;
  int last_newton_iters_ = 0;

  EventJournal journal_;
  std::vector<char> event_applied_;
  TimeSeries series_;
  EigenScan scan_;
  Real next_scan_t_ = 0.0;
  Termination termination_ = Termination::completed;
  std::string termination_detail_;
  std::vector<int> device_buses_;
};

/// Slice two channels (plus an optional annotation channel) over [t0, t1];
/// passing 0/0 selects the final second.  Throws ConfigError for unknown
/// channels or an empty window.
[[nodiscard]] PhaseTrace extract_phase_trace(const TimeSeries& series,
                                             const std::string& a, const std::string& b,
                                             const std::string& annotation = {},
                                             Real t0 = 0.0, Real t1 = 0.0);

/// Convenience wrapper: build, run, classify.
[[nodiscard]] RunArtifacts run_scenario(const Scenario& sc);

} // namespace phasordyn
