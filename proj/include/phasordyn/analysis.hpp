#pragma once

#include "phasordyn/types.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace phasordyn {

// ============================================================================
// Bifurcation-analysis layer: finite-difference Jacobians of the frozen-slow
// fast subsystem, eigenvalue spectra along the slow trajectory, detection of
// stability-boundary crossings, time-domain limit-cycle confirmation, phase
// traces and the final run classification.
// ============================================================================

/// Central finite-difference Jacobian of `f` at z0.  Step per component:
/// max(rel |z|, abs_floor).  `f` returns false when it cannot be evaluated
/// (network divergence near a fold); that raises NumericError here.
[[nodiscard]] Mat fd_jacobian(const std::function<bool(const Vec&, Vec&)>& f,
                              const Vec& z0, Real rel = 1e-6, Real abs_floor = 1e-8);

/// Eigenvalues by the dense QR-class solver, sorted by descending real part
/// (ties by descending imaginary part).  Conjugate pairs stay exactly closed
/// because the input is real.
[[nodiscard]] ComplexVec eigen_spectrum(const Mat& jac);

struct EigenSnapshot {
  Real t = 0.0;
  ComplexVec eigenvalues;
};

enum class CrossingKind { hopf, snb };

struct Crossing {
  Real t = 0.0;
  CrossingKind kind = CrossingKind::hopf;
  int direction = +1; // +1 rightmost real part turns positive, -1 recovers
  Real imag_abs = 0.0;
};

struct EigenScan {
  std::vector<EigenSnapshot> snapshots;
  std::vector<Crossing> crossings;
};

/// Rightmost real part of a spectrum (empty spectra count as -inf).
[[nodiscard]] Real rightmost_real(const ComplexVec& eigenvalues);

/// Zero crossings of the rightmost real part between consecutive snapshots,
/// located by linear interpolation.  A crossing whose mode carries
/// |imag| > imag_floor (rad/s) is oscillatory (hopf), otherwise aperiodic (snb).
[[nodiscard]] std::vector<Crossing> detect_crossings(
    std::span<const EigenSnapshot> snapshots, Real imag_floor = 0.5);

struct LimitCycleReport {
  bool exists = false;
  Real amplitude_pkpk = 0.0;
  Real period_s = 0.0;
};

struct LimitCycleOptions {
  Real threshold_pkpk = 1e-3;
  Real expected_period_s = 0.2; // window must cover >= 5 of these
  Real envelope_tolerance = 0.10;
};

/// Detrend (mean + best-fit line), then require peak-to-peak above threshold
/// and a stationary envelope over the last half window.  Period comes from
/// mean zero-crossing spacing of the detrended signal.
/// Throws ConfigError when the window is shorter than five expected periods.
[[nodiscard]] LimitCycleReport detect_limit_cycle(std::span<const Real> t,
                                                  std::span<const Real> y,
                                                  const LimitCycleOptions& opts = {});

struct PhaseTrace {
  Vec a;
  Vec b;
  Vec annotation;
  std::string name_a, name_b, name_annotation;
};

enum class Verdict { stable = 0, s_lt1 = 1, s_lt3 = 3, collapse = 9 };

[[nodiscard]] std::string verdict_name(Verdict v);
[[nodiscard]] int verdict_exit_code(Verdict v); // 0 / 10 / 11 / 12

enum class Termination { completed, collapsed, runaway };

/// Inputs distilled from a finished run; classify_instability applies the
/// decision rules to them.
struct ClassificationInput {
  Termination termination = Termination::completed;
  std::span<const Crossing> crossings;
  bool sustained_cycle_after_crossing = false;
  bool slow_event_before_end = false; // any tap/limiter journal entry
  // time of the first tap/limiter entry; an snb crossing only counts toward
  // s_lt1 when it happens after this (aperiodic loss of equilibrium must be
  // driven by the slow mechanism, not by a startup or post-fault transient)
  std::optional<Real> first_slow_event_t;
};

/// stable unless: the run collapsed (network divergence); a hopf crossing is
/// followed by a sustained limit cycle (oscillatory slow-driven instability);
/// or an snb crossing / aperiodic divergence follows a slow event.
[[nodiscard]] Verdict classify_instability(const ClassificationInput& in);

} // namespace phasordyn
