#include "cssc/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "cssc/errors.hpp"
#include "cssc/rng.hpp"

namespace cssc {

std::vector<Trajectory> generate_toy(const ToySpec& spec) {
  if (spec.count < 1) raise(Errc::invalid_spec, "trajectory count must be positive");
  if (spec.points < 2) raise(Errc::invalid_spec, "grid needs at least two points");
  if (spec.t_end <= 0.0) raise(Errc::invalid_spec, "horizon must be positive");
  if (spec.amp_lo <= 0.0 || spec.amp_hi < spec.amp_lo || spec.freq_hi < spec.freq_lo) {
    raise(Errc::invalid_spec, "amplitude and frequency ranges are inverted or nonpositive");
  }
  if (spec.observe_fraction <= 0.0 || spec.observe_fraction > 1.0) {
    raise(Errc::invalid_spec, "observation fraction must lie in (0, 1]");
  }

  Rng rng(spec.seed);
  const int p = spec.points;
  const double step = spec.t_end / (p - 1);
  const int observed = std::max(2, static_cast<int>(std::floor(spec.observe_fraction * p)));

  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int c = 0; c < spec.count; ++c) {
    const double amp = rng.uniform(spec.amp_lo, spec.amp_hi);
    const double freq = rng.uniform(spec.freq_lo, spec.freq_hi);
    const double x0 = rng.normal();
    const double phase = std::asin(std::clamp(x0 / amp, -1.0, 1.0));

    Trajectory traj;
    traj.dim = 1;
    traj.grid.points.resize(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) {
      traj.grid.points[static_cast<std::size_t>(i)] = i * step;
    }
    traj.grid.points.back() = spec.t_end;
    if (spec.jitter) {
      for (int i = 1; i + 1 < p; ++i) {
        traj.grid.points[static_cast<std::size_t>(i)] =
            i * step + rng.uniform(-0.4, 0.4) * step;
      }
    }

    traj.values.resize(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) {
      const double t = traj.grid.points[static_cast<std::size_t>(i)];
      traj.values[static_cast<std::size_t>(i)] = {
          amp * std::sin(2.0 * std::numbers::pi * freq * t + phase)};
    }

    traj.observed.assign(static_cast<std::size_t>(p), false);
    traj.observed.front() = true;
    traj.observed.back() = true;
    const int interior_need = observed - 2;
    std::vector<int> pool(static_cast<std::size_t>(p - 2));
    std::iota(pool.begin(), pool.end(), 1);
    for (int i = 0; i < interior_need; ++i) {
      const int j = rng.uniform_int(i, static_cast<int>(pool.size()) - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
      traj.observed[static_cast<std::size_t>(pool[static_cast<std::size_t>(i)])] = true;
    }

    require_valid(traj);
    out.push_back(std::move(traj));
  }
  return out;
}

SmoothFunction smooth_sin() {
  SmoothFunction fn;
  fn.name = "sin";
  fn.a = 0.0;
  fn.b = 2.0 * std::numbers::pi;
  fn.fourth_sup = 1.0;
  fn.value = [](double t) { return std::sin(t); };
  fn.deriv = [](double t) { return std::cos(t); };
  return fn;
}

SmoothFunction smooth_gauss() {
  // Curvature at the ends is exp(-0.5/s^2)-small, so the zero-end-moment
  // construction stays within the fourth-order bound at practical grids.
  constexpr double c = 0.5, s = 0.07;
  SmoothFunction fn;
  fn.name = "gauss";
  fn.a = 0.0;
  fn.b = 1.0;
  fn.fourth_sup = 3.0 / (s * s * s * s);  // attained at the center
  fn.value = [](double t) {
    const double u = (t - c) / s;
    return std::exp(-0.5 * u * u);
  };
  fn.deriv = [](double t) {
    const double u = (t - c) / s;
    return -u / s * std::exp(-0.5 * u * u);
  };
  return fn;
}

SmoothFunction smooth_poly5() {
  SmoothFunction fn;
  fn.name = "poly5";
  fn.a = 0.0;
  fn.b = 1.0;
  fn.fourth_sup = 96.0;  // |120 t - 24| on [0, 1]
  fn.value = [](double t) {
    return ((((t - 1.0) * t - 4.0 / 3.0) * t) * t + 1.0) * t - 0.3;
  };
  fn.deriv = [](double t) {
    return (((5.0 * t - 4.0) * t - 4.0) * t) * t + 1.0;
  };
  return fn;
}

std::vector<SmoothFunction> smooth_suite() {
  return {smooth_sin(), smooth_gauss(), smooth_poly5()};
}

SmoothFunction smooth_by_name(const std::string& name) {
  for (SmoothFunction& fn : smooth_suite()) {
    if (fn.name == name) return std::move(fn);
  }
  raise(Errc::unknown_function, "no smooth test function named '" + name + "'");
}

Trajectory sample_smooth(const SmoothFunction& fn, int intervals) {
  if (intervals < 1) raise(Errc::invalid_spec, "interval count must be positive");
  Trajectory traj;
  traj.dim = 1;
  const int p = intervals + 1;
  traj.grid.points.resize(static_cast<std::size_t>(p));
  traj.values.resize(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    const double t =
        i == intervals ? fn.b : fn.a + (fn.b - fn.a) * i / intervals;
    traj.grid.points[static_cast<std::size_t>(i)] = t;
    traj.values[static_cast<std::size_t>(i)] = {fn.value(t)};
  }
  traj.observed.assign(static_cast<std::size_t>(p), true);
  require_valid(traj);
  return traj;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

void write_trajectories(const std::string& path, const std::vector<Trajectory>& trajs) {
  std::ofstream out(path);
  if (!out) raise(Errc::parse_error, "cannot write " + path);
  std::string line;
  for (const Trajectory& traj : trajs) {
    require_valid(traj);
    line.clear();
    line += "{\"t\":[";
    for (std::size_t i = 0; i < traj.grid.points.size(); ++i) {
      if (i) line += ',';
      append_number(line, traj.grid.points[i]);
    }
    line += "],\"x\":[";
    for (std::size_t i = 0; i < traj.values.size(); ++i) {
      if (i) line += ',';
      line += '[';
      for (int d = 0; d < traj.dim; ++d) {
        if (d) line += ',';
        append_number(line, traj.values[i][static_cast<std::size_t>(d)]);
      }
      line += ']';
    }
    line += "],\"observed\":[";
    bool first = true;
    for (std::size_t i = 0; i < traj.observed.size(); ++i) {
      if (!traj.observed[i]) continue;
      if (!first) line += ',';
      first = false;
      line += std::to_string(i);
    }
    line += "]}";
    out << line << '\n';
  }
}

std::vector<Trajectory> read_trajectories(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::parse_error, "cannot open " + path);
  std::vector<Trajectory> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::parse_error,
            path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    Trajectory traj;
    try {
      traj.grid.points = j.at("t").get<std::vector<double>>();
      traj.values = j.at("x").get<std::vector<std::vector<double>>>();
      const std::vector<int> observed = j.at("observed").get<std::vector<int>>();
      traj.dim = traj.values.empty() ? 0 : static_cast<int>(traj.values.front().size());
      traj.observed.assign(traj.grid.points.size(), false);
      for (int idx : observed) {
        if (idx < 0 || idx >= static_cast<int>(traj.observed.size())) {
          raise(Errc::parse_error, path + ":" + std::to_string(line_no) +
                                       ": observed index out of range");
        }
        traj.observed[static_cast<std::size_t>(idx)] = true;
      }
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::parse_error,
            path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    require_valid(traj);
    out.push_back(std::move(traj));
  }
  return out;
}

}  // namespace cssc
