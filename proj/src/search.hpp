#pragma once

// Small 1-D search helpers shared by the solvers.

#include <cmath>
#include <utility>

namespace aoisched::detail {

/// Golden-section minimisation of a unimodal f on [lo, hi]. Stops when the
/// bracket is below rel_tol times its midpoint. Returns (argmin, min).
template <class F>
std::pair<double, double> golden_section_min(F&& f, double lo, double hi, double rel_tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 400 && (hi - lo) > rel_tol * 0.5 * (std::abs(lo) + std::abs(hi)); ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace aoisched::detail
