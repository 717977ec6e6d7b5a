#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cssc/errors.hpp"

namespace cssc {

/// Time stamps t_0 < ... < t_n in seconds. Stored as a plain vector so that
/// invalid grids can exist long enough to be diagnosed by validation.
struct TimeGrid {
  std::vector<double> points;

  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> p) : points(std::move(p)) {}

  int size() const { return static_cast<int>(points.size()); }
  int intervals() const { return size() - 1; }
  double time(int k) const { return points[static_cast<std::size_t>(k)]; }
  double interval(int k) const { return points[k + 1] - points[k]; }
  double front() const { return points.front(); }
  double back() const { return points.back(); }
  bool strictly_increasing() const;
  std::vector<double> interval_lengths() const;
};

/// One time series: values x_k at every grid point plus the observation mask.
/// Only masked points are visible to a model; the rest are held out as
/// interpolation targets.
struct Trajectory {
  TimeGrid grid;
  std::vector<std::vector<double>> values;  // size n+1, each of length dim
  std::vector<bool> observed;               // size n+1
  int dim = 0;

  std::vector<int> observed_indices() const;
  int observed_count() const;
};

enum class DerivativeMode { analytical, numerical };
enum class CompensationSpace { output, hidden, none };

const char* to_string(DerivativeMode m);
const char* to_string(CompensationSpace s);
DerivativeMode derivative_mode_from_string(const std::string& s);
CompensationSpace compensation_space_from_string(const std::string& s);

/// Everything a run needs: model sizes, integrator granularity, derivative
/// extraction mode, loss weight, ablation switches, optimizer constants.
struct RunConfig {
  int hidden_dim = 16;                  // ODE state size m
  std::vector<int> f_hidden = {64, 64}; // hidden widths of the dynamics net
  std::vector<int> g_hidden = {64};     // hidden widths of the decoder
  int cell_input_embed = 0;             // optional input-embedding width, 0 = raw input

  int substeps = 8;                     // integrator steps per knot interval
  DerivativeMode derivative_mode = DerivativeMode::analytical;
  double numerical_delta = 1e-3;        // probe spacing for numerical one-sided derivatives

  double alpha = 1000.0;                // compensation penalty weight
  CompensationSpace compensation_space = CompensationSpace::output;
  bool strict_natural_boundary = false; // end moments -ddot(o) instead of 0

  // Ablation switches.
  bool block_dot_o = false;   // detach first-derivative jumps from the tape
  bool block_ddot_o = false;  // detach second-derivative jumps from the tape
  bool drop_ddot_o = false;   // use zero second-derivative jumps entirely
  bool prehoc = false;        // train compensated, evaluate raw
  bool posthoc = false;       // train raw, evaluate compensated

  double learning_rate = 0.02;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::uint64_t seed = 0;
};

struct ValidationIssue {
  Errc code;
  std::string message;
};

/// Checks a trajectory against its structural invariants: strictly increasing
/// times, at least one interval, consistent dimensions, finite values, both
/// endpoints observed. Returns the first violation found, or nullopt.
std::optional<ValidationIssue> validate_trajectory(const Trajectory& traj);

/// Throws Error with the violated invariant's code.
void require_valid(const Trajectory& traj);

/// Throws Errc::invalid_spec if the config is unusable.
void validate_config(const RunConfig& cfg);

}  // namespace cssc
