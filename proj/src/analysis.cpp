#include "phasordyn/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace phasordyn {

Mat fd_jacobian(const std::function<bool(const Vec&, Vec&)>& f, const Vec& z0,
                Real rel, Real abs_floor) {
  const int n = static_cast<int>(z0.size());
  Mat jac(n, n);
  Vec zp(n), f_plus(n), f_minus(n);
  for (int j = 0; j < n; ++j) {
    const Real h = std::max(rel * std::abs(z0[j]), abs_floor);
    zp = z0;
    zp[j] += h;
    if (!f(zp, f_plus)) {
      throw NumericError("jacobian: evaluation failed at column " + std::to_string(j));
    }
    zp[j] = z0[j] - h;
    if (!f(zp, f_minus)) {
      throw NumericError("jacobian: evaluation failed at column " + std::to_string(j));
    }
    jac.col(j) = (f_plus - f_minus) / (2.0 * h);
  }
  return jac;
}

ComplexVec eigen_spectrum(const Mat& jac) {
  if (jac.rows() == 0) return ComplexVec();
  Eigen::EigenSolver<Mat> solver(jac, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigen solver failed to converge");
  }
  ComplexVec ev = solver.eigenvalues();
  std::vector<Complex> sorted(ev.data(), ev.data() + ev.size());
  std::stable_sort(sorted.begin(), sorted.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  for (int i = 0; i < ev.size(); ++i) ev[i] = sorted[i];
  return ev;
}

Real rightmost_real(const ComplexVec& eigenvalues) {
  if (eigenvalues.size() == 0) return -std::numeric_limits<Real>::infinity();
  Real worst = -std::numeric_limits<Real>::infinity();
  for (int i = 0; i < eigenvalues.size(); ++i) {
    worst = std::max(worst, eigenvalues[i].real());
  }
  return worst;
}

namespace {

// |imag| of the eigenvalue with the largest real part.
Real rightmost_imag_abs(const ComplexVec& ev) {
  Real best_re = -std::numeric_limits<Real>::infinity();
  Real imag = 0.0;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i].real() > best_re) {
      best_re = ev[i].real();
      imag = std::abs(ev[i].imag());
    }
  }
  return imag;
}

} // namespace

std::vector<Crossing> detect_crossings(std::span<const EigenSnapshot> snapshots,
                                       Real imag_floor) {
  std::vector<Crossing> crossings;
  for (std::size_t k = 0; k + 1 < snapshots.size(); ++k) {
    const auto& a = snapshots[k];
    const auto& b = snapshots[k + 1];
    if (a.eigenvalues.size() == 0 || b.eigenvalues.size() == 0) continue;
    const Real ra = rightmost_real(a.eigenvalues);
    const Real rb = rightmost_real(b.eigenvalues);
    int direction = 0;
    if (ra <= 0.0 && rb > 0.0) direction = +1;
    if (ra > 0.0 && rb <= 0.0) direction = -1;
    if (direction == 0 || ra == rb) continue;
    Crossing c;
    c.direction = direction;
    c.t = a.t + (b.t - a.t) * (0.0 - ra) / (rb - ra);
    // Inspect the mode on the unstable side of the crossing.
    const Real imag = rightmost_imag_abs(direction > 0 ? b.eigenvalues : a.eigenvalues);
    c.imag_abs = imag;
    c.kind = imag > imag_floor ? CrossingKind::hopf : CrossingKind::snb;
    crossings.push_back(c);
  }
  return crossings;
}

LimitCycleReport detect_limit_cycle(std::span<const Real> t, std::span<const Real> y,
                                    const LimitCycleOptions& opts) {
  LimitCycleReport report;
  if (t.size() != y.size()) throw ConfigError("limit cycle: length mismatch");
  if (t.size() < 8) throw ConfigError("limit cycle: too few samples");
  const Real window = t.back() - t.front();
  if (window + 1e-9 < 5.0 * opts.expected_period_s) {
    throw ConfigError("limit cycle: window " + std::to_string(window) +
                      " s shorter than five expected periods");
  }

  // Remove mean and best-fit line so slow drift does not mask or fake a cycle.
  const std::size_t n = t.size();
  Real st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Real ti = t[i] - t.front();
    st += ti;
    sy += y[i];
    stt += ti * ti;
    sty += ti * y[i];
  }
  const Real denom = n * stt - st * st;
  const Real slope = denom != 0.0 ? (n * sty - st * sy) / denom : 0.0;
  const Real offset = (sy - slope * st) / n;
  std::vector<Real> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = y[i] - (offset + slope * (t[i] - t.front()));
  }

  auto pkpk = [&](std::size_t lo, std::size_t hi) {
    Real mn = r[lo], mx = r[lo];
    for (std::size_t i = lo; i < hi; ++i) {
      mn = std::min(mn, r[i]);
      mx = std::max(mx, r[i]);
    }
    return mx - mn;
  };

  report.amplitude_pkpk = pkpk(0, n);

  std::vector<Real> crossing_times;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if ((r[i] <= 0.0 && r[i + 1] > 0.0) || (r[i] > 0.0 && r[i + 1] <= 0.0)) {
      const Real frac = r[i] / (r[i] - r[i + 1]);
      crossing_times.push_back(t[i] + frac * (t[i + 1] - t[i]));
    }
  }
  if (crossing_times.size() >= 3) {
    const Real span = crossing_times.back() - crossing_times.front();
    report.period_s = 2.0 * span / static_cast<Real>(crossing_times.size() - 1);
  }

  // Envelope stationarity over the last half window, quarter vs quarter.
  const std::size_t half = n / 2;
  const std::size_t threeq = half + (n - half) / 2;
  const Real pk3 = pkpk(half, threeq);
  const Real pk4 = pkpk(threeq, n);
  const bool envelope_ok =
      pk3 > 0.0 && std::abs(pk4 - pk3) <= opts.envelope_tolerance * pk3;

  report.exists = report.amplitude_pkpk > opts.threshold_pkpk &&
                  crossing_times.size() >= 4 && envelope_ok;
  return report;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::s_lt1: return "s_lt1";
    case Verdict::s_lt3: return "s_lt3";
    case Verdict::collapse: return "collapse";
  }
  return "unknown";
}

int verdict_exit_code(Verdict v) {
  switch (v) {
    case Verdict::stable: return 0;
    case Verdict::s_lt1: return 10;
    case Verdict::s_lt3: return 11;
    case Verdict::collapse: return 12;
  }
  return 12;
}

Verdict classify_instability(const ClassificationInput& in) {
  if (in.termination == Termination::collapsed) return Verdict::collapse;
  bool hopf_up = false, snb_up = false;
  for (const auto& c : in.crossings) {
    if (c.direction > 0 && c.kind == CrossingKind::hopf) hopf_up = true;
    if (c.direction > 0 && c.kind == CrossingKind::snb &&
        in.first_slow_event_t && c.t >= *in.first_slow_event_t) {
      snb_up = true;
    }
  }
  if (hopf_up && in.sustained_cycle_after_crossing) return Verdict::s_lt3;
  if ((snb_up || in.termination == Termination::runaway) && in.slow_event_before_end) {
    return Verdict::s_lt1;
  }
  return Verdict::stable;
}

} // namespace phasordyn
