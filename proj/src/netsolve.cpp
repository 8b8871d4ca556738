#include "phasordyn/netsolve.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace phasordyn {

void NetworkLu::factorize(const AdmittanceMatrix& base,
                          std::span<const NortonShunt> shunts) {
  y_aug = base.y;
  for (const auto& shunt : shunts) {
    y_aug(shunt.bus, shunt.bus) += shunt.y;
  }
  lu.compute(y_aug);
  factorized = true;
}

Complex load_current(const VoltageLoad& load, Complex v) {
  Real vm = std::abs(v);
  if (vm < 1e-12) return Complex(0.0, 0.0); // dead bus draws nothing
  const Real p = load.p0 * std::pow(vm / load.v0, load.alpha);
  const Real q = load.q0 * std::pow(vm / load.v0, load.beta);
  return std::conj(Complex(p, q) / v);
}

Complex limited_source_current(const CurrentLimitedSource& src, Complex v) {
  Complex i = (src.e - v) * src.y_device;
  const Real mag = std::abs(i);
  if (src.i_max > 0.0 && mag > src.i_max) {
    i *= src.i_max / mag;
  }
  return i * src.scale;
}

namespace {

// Injection vector at voltage v (loads drawn, limited sources shifted to the
// right-hand side because their admittance sits in the factorized matrix).
ComplexVec assemble_injections(const ComplexVec& j_fixed,
                               std::span<const VoltageLoad> loads,
                               std::span<const CurrentLimitedSource> limited,
                               const ComplexVec& v) {
  ComplexVec j = j_fixed;
  for (const auto& load : loads) {
    j[load.bus] -= load_current(load, v[load.bus]);
  }
  for (const auto& src : limited) {
    j[src.bus] += limited_source_current(src, v[src.bus]) +
                  src.y_device * src.scale * v[src.bus];
  }
  return j;
}

// Newton on the full complex balance, used when the fixed-point iteration
// fails: near a loadability limit the plain iteration has an expanding real
// direction for which no amount of relaxation helps, yet the solution exists.
bool newton_solve(const NetworkLu& lu, const ComplexVec& j_fixed,
                  std::span<const VoltageLoad> loads,
                  std::span<const CurrentLimitedSource> limited, ComplexVec& v,
                  const NetworkSolveOptions& opts, int& iterations) {
  const int n = static_cast<int>(j_fixed.size());
  auto residual = [&](const ComplexVec& vv) -> ComplexVec {
    return lu.y_aug * vv - assemble_injections(j_fixed, loads, limited, vv);
  };
  auto pack = [n](const ComplexVec& r) {
    Vec f(2 * n);
    for (int i = 0; i < n; ++i) {
      f[i] = r[i].real();
      f[n + i] = r[i].imag();
    }
    return f;
  };

  if (!v.allFinite()) v = ComplexVec::Ones(n);
  ComplexVec r = residual(v);
  Real fnorm = pack(r).lpNorm<Eigen::Infinity>();
  Mat jac(2 * n, 2 * n);
  for (int iter = 0; iter < 40; ++iter) {
    ++iterations;
    if (fnorm < 1e-12) return true;
    for (int col = 0; col < 2 * n; ++col) {
      const int bus = col % n;
      const Real h = 1e-7;
      ComplexVec vp = v;
      vp[bus] += (col < n) ? Complex(h, 0.0) : Complex(0.0, h);
      jac.col(col) = (pack(residual(vp)) - pack(r)) / h;
    }
    Eigen::PartialPivLU<Mat> jlu(jac);
    const Vec delta = jlu.solve(-pack(r));
    if (!delta.allFinite()) return false;

    Real t = 1.0;
    ComplexVec v_try;
    ComplexVec r_try;
    Real f_try = std::numeric_limits<Real>::infinity();
    for (int cut = 0; cut < 7; ++cut) {
      v_try = v;
      for (int i = 0; i < n; ++i) {
        v_try[i] += t * Complex(delta[i], delta[n + i]);
      }
      r_try = residual(v_try);
      f_try = pack(r_try).lpNorm<Eigen::Infinity>();
      if (f_try < fnorm) break;
      t *= 0.5;
    }
    if (!(f_try < fnorm)) {
      if (std::getenv("PD_NETDEBUG"))
        std::fprintf(stderr, "[net] newton stuck iter=%d fnorm=%.3e f_try=%.3e step_inf=%.3e\n",
                     iter, fnorm, f_try, delta.lpNorm<Eigen::Infinity>());
      return false; // stuck (or NaN)
    }
    const Real step = t * delta.lpNorm<Eigen::Infinity>();
    v = v_try;
    r = r_try;
    fnorm = f_try;
    if (step < opts.tolerance && fnorm < 1e-9) return true;
  }
  return fnorm < 1e-9;
}

} // namespace

NetworkSolveResult solve_network(const NetworkLu& lu, const ComplexVec& j_fixed,
                                 std::span<const VoltageLoad> loads,
                                 std::span<const CurrentLimitedSource> limited,
                                 ComplexVec& v, const NetworkSolveOptions& opts) {
  NetworkSolveResult result;
  if (!lu.factorized) throw ConfigError("solve_network: factorize first");
  const int n = static_cast<int>(j_fixed.size());
  if (v.size() != n) {
    v = ComplexVec::Ones(n); // cold start
  }
  const ComplexVec v_entry = v;

  // Fixed-point relaxation: full steps while contracting, halved on growth.
  Real relax = 1.0;
  Real dv_prev = std::numeric_limits<Real>::infinity();
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const ComplexVec j = assemble_injections(j_fixed, loads, limited, v);
    ComplexVec v_new = lu.lu.solve(j);
    const Real dv = (v_new - v).lpNorm<Eigen::Infinity>();
    ++result.iterations;
    if (!v_new.allFinite() || dv > 1e9) break; // hand over to Newton
    if (dv > dv_prev && relax > 0.125) relax *= 0.5;
    dv_prev = dv;
    v += relax * (v_new - v);
    if (dv < opts.tolerance) {
      result.converged = true;
      const ComplexVec jf = assemble_injections(j_fixed, loads, limited, v);
      result.residual_inf = (lu.y_aug * v - jf).lpNorm<Eigen::Infinity>();
      return result;
    }
  }

  v = v_entry;
  if (std::getenv("PD_NETDEBUG"))
    std::fprintf(stderr, "[net] picard gave up dv_prev=%.3e relax=%.3f iters=%d\n",
                 dv_prev, relax, result.iterations);
  if (newton_solve(lu, j_fixed, loads, limited, v, opts, result.iterations)) {
    result.converged = true;
    const ComplexVec jf = assemble_injections(j_fixed, loads, limited, v);
    result.residual_inf = (lu.y_aug * v - jf).lpNorm<Eigen::Infinity>();
    return result;
  }
  result.converged = false;
  return result;
}

} // namespace phasordyn
