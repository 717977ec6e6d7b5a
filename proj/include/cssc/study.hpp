#pragma once

#include <span>
#include <string>
#include <vector>

#include "cssc/data.hpp"

namespace cssc {

/// Sup-norm constants of the natural-spline interpolation error bound:
/// |x - s|     <= (5/384) sup|x''''| tau^4
/// |x' - s'|   <= (1/24)  sup|x''''| tau^3
/// on uniform knots of spacing tau, for x with curvature vanishing at the
/// ends (so the natural end conditions are exact).
inline constexpr double kValueBoundConstant = 5.0 / 384.0;
inline constexpr double kDerivBoundConstant = 1.0 / 24.0;

struct LevelReport {
  int intervals = 0;
  double tau = 0.0;
  double value_err = 0.0;    // sup |x - s| over the dense reference grid
  double deriv_err = 0.0;    // sup |x' - s'|
  double value_ratio = 0.0;  // value_err / (C0 sup4 tau^4)
  double deriv_ratio = 0.0;  // deriv_err / (C1 sup4 tau^3)
};

struct ConvergenceReport {
  std::string function;
  std::vector<LevelReport> levels;
  double value_slope = 0.0;  // log-log least-squares order, expect about 4
  double deriv_slope = 0.0;  // expect about 3
  bool bound_ok = true;      // every ratio at or below 1
};

/// Interpolates the function at each knot count, measures sup errors against
/// the closed form on a dense grid, and checks them against the bound.
ConvergenceReport run_convergence_study(const SmoothFunction& fn, std::span<const int> levels,
                                        int dense_points = 10001);

}  // namespace cssc
