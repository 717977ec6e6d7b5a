#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cssc/core.hpp"

namespace cssc {

/// Sinusoid family: x(t) = A sin(2 pi nu t + phi) with A, nu uniform and
/// x(0) ~ N(0,1) realized through the phase, on a uniform grid (optionally
/// jittered in the interior). The observation mask keeps both endpoints plus
/// a random interior subset.
struct ToySpec {
  int count = 64;
  int points = 100;
  double t_end = 5.0;
  double amp_lo = 0.5, amp_hi = 1.5;
  double freq_lo = 0.2, freq_hi = 1.0;  // Hz
  double observe_fraction = 0.3;
  bool jitter = false;  // interior stamps shift by U(-0.4, 0.4) of the base step
  std::uint64_t seed = 0;
};

std::vector<Trajectory> generate_toy(const ToySpec& spec);

/// A scalar test function with closed-form derivatives and a known bound on
/// its fourth derivative, for interpolation error studies. Each suite member
/// has zero second derivative at both ends (exactly or to rounding), so the
/// natural end conditions cost no approximation order.
struct SmoothFunction {
  std::string name;
  double a = 0.0, b = 1.0;
  double fourth_sup = 0.0;  // sup of |d^4 x / dt^4| over [a, b]
  std::function<double(double)> value;
  std::function<double(double)> deriv;
};

SmoothFunction smooth_sin();    // sin t on [0, 2 pi]
SmoothFunction smooth_gauss();  // narrow centered bump on [0, 1]
SmoothFunction smooth_poly5();  // quintic with flat-curvature ends on [0, 1]
std::vector<SmoothFunction> smooth_suite();
SmoothFunction smooth_by_name(const std::string& name);

/// Samples the function on a uniform grid with the given interval count,
/// every point observed.
Trajectory sample_smooth(const SmoothFunction& fn, int intervals);

/// One trajectory per line: {"t":[...],"x":[[...]...],"observed":[indices]}.
/// Written values survive a round trip bit for bit.
std::vector<Trajectory> read_trajectories(const std::string& path);
void write_trajectories(const std::string& path, const std::vector<Trajectory>& trajs);

}  // namespace cssc
