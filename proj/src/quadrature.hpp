#pragma once

#include "mixop/errors.hpp"
#include "mixop/kernel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace mixop::quad {

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod on a finite interval.
template <typename F>
Estimate finite(F&& f, double a, double b, const QuadratureConfig& cfg) {
  if (!(b > a)) return {};
  // Boost's error estimate has an absolute floor, which makes tiny shells
  // near the origin refine to max depth; map to [0, 1] with an O(1) integrand.
  const double width = b - a;
  double scale = std::abs(f(a + 0.5 * width));
  if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
  auto g = [&](double t) { return f(a + width * t) / scale; };
  double err = 0.0;
  double l1 = 0.0;
  const double v = width * scale *
                   boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                       g, 0.0, 1.0, static_cast<unsigned>(cfg.max_depth), cfg.rel_tol, &err, &l1);
  err *= width * scale;
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "quadrature produced a non-finite value on [" << a << ", " << b << "]";
    throw NumericError(os.str());
  }
  return {v, err};
}

/// Sums shell integrals produced by `shell(k)` until they are negligible or
/// their ratio has settled, in which case the geometric remainder is added.
/// Power-law behaviour at 0 or infinity gives exactly geometric shells.
template <typename Shell>
Estimate dyadic_series(Shell&& shell, const QuadratureConfig& cfg, int max_shells, const char* what) {
  Estimate total;
  double prev = 0.0;
  double prev_ratio = -1.0;
  int small_run = 0;
  for (int k = 0; k < max_shells; ++k) {
    const Estimate e = shell(k);
    total.value += e.value;
    total.error += e.error;
    const double mag = std::abs(e.value);
    if (mag <= 1e-3 * cfg.rel_tol * std::abs(total.value) + cfg.abs_tol) {
      if (++small_run >= 3) return total;
    } else {
      small_run = 0;
    }
    if (prev > 0.0 && mag > 0.0) {
      const double ratio = mag / prev;
      if (k >= 4 && ratio < 0.999 && std::abs(ratio - prev_ratio) <= 1e-6 * ratio) {
        total.value += e.value * ratio / (1.0 - ratio);
        return total;
      }
      prev_ratio = ratio;
    }
    prev = mag;
  }
  std::ostringstream os;
  os << what << " quadrature did not converge; last shell contribution " << prev;
  throw NumericError(os.str());
}

/// Integral over (0, b] of a function that may be singular at 0.
template <typename F>
Estimate inward_dyadic(F&& f, double b, const QuadratureConfig& cfg, int max_shells = 400) {
  return dyadic_series(
      [&](int k) {
        const double hi = std::ldexp(b, -k);
        return finite(f, 0.5 * hi, hi, cfg);
      },
      cfg, max_shells, "near-origin");
}

/// Integral over [a, inf).
template <typename F>
Estimate outward_dyadic(F&& f, double a, const QuadratureConfig& cfg, int max_shells = 400) {
  return dyadic_series(
      [&](int k) {
        const double lo = std::ldexp(a, k);
        return finite(f, lo, 2.0 * lo, cfg);
      },
      cfg, max_shells, "tail");
}

}  // namespace mixop::quad
