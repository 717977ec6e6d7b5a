#include "cssc/study.hpp"

#include <algorithm>
#include <cmath>

#include "cssc/errors.hpp"
#include "cssc/spline.hpp"

namespace cssc {
namespace {

double fit_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

}  // namespace

ConvergenceReport run_convergence_study(const SmoothFunction& fn, std::span<const int> levels,
                                        int dense_points) {
  if (levels.empty()) raise(Errc::invalid_spec, "convergence study needs at least one level");
  if (dense_points < 2) raise(Errc::invalid_spec, "dense grid needs at least two points");

  ConvergenceReport report;
  report.function = fn.name;
  std::vector<double> log_tau, log_value, log_deriv;

  for (int intervals : levels) {
    const Trajectory traj = sample_smooth(fn, intervals);
    const CompensationSpline spline = natural_spline(traj);

    LevelReport level;
    level.intervals = intervals;
    level.tau = (fn.b - fn.a) / intervals;

    for (int j = 0; j < dense_points; ++j) {
      const double t = j + 1 == dense_points
                           ? fn.b
                           : fn.a + (fn.b - fn.a) * j / (dense_points - 1);
      const double sv = eval_compensation(spline, t)[0];
      const double sd = eval_compensation_deriv(spline, t, 1)[0];
      level.value_err = std::max(level.value_err, std::abs(fn.value(t) - sv));
      level.deriv_err = std::max(level.deriv_err, std::abs(fn.deriv(t) - sd));
    }

    const double tau4 = level.tau * level.tau * level.tau * level.tau;
    level.value_ratio = level.value_err / (kValueBoundConstant * fn.fourth_sup * tau4);
    level.deriv_ratio =
        level.deriv_err / (kDerivBoundConstant * fn.fourth_sup * tau4 / level.tau);
    report.bound_ok = report.bound_ok && level.value_ratio <= 1.0 && level.deriv_ratio <= 1.0;
    report.levels.push_back(level);

    log_tau.push_back(std::log(level.tau));
    log_value.push_back(std::log(std::max(level.value_err, 1e-300)));
    log_deriv.push_back(std::log(std::max(level.deriv_err, 1e-300)));
  }

  report.value_slope = fit_slope(log_tau, log_value);
  report.deriv_slope = fit_slope(log_tau, log_deriv);
  return report;
}

}  // namespace cssc
