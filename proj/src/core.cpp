#include "cssc/core.hpp"

#include <cmath>

namespace cssc {

bool TimeGrid::strictly_increasing() const {
  for (int k = 0; k + 1 < size(); ++k) {
    if (!(points[k] < points[k + 1])) return false;
  }
  return true;
}

std::vector<double> TimeGrid::interval_lengths() const {
  std::vector<double> tau(static_cast<std::size_t>(std::max(0, intervals())));
  for (int k = 0; k < intervals(); ++k) tau[k] = interval(k);
  return tau;
}

std::vector<int> Trajectory::observed_indices() const {
  std::vector<int> idx;
  for (int k = 0; k < static_cast<int>(observed.size()); ++k) {
    if (observed[k]) idx.push_back(k);
  }
  return idx;
}

int Trajectory::observed_count() const {
  int c = 0;
  for (bool b : observed) c += b ? 1 : 0;
  return c;
}

const char* to_string(DerivativeMode m) {
  return m == DerivativeMode::analytical ? "analytical" : "numerical";
}

const char* to_string(CompensationSpace s) {
  switch (s) {
    case CompensationSpace::output: return "output";
    case CompensationSpace::hidden: return "hidden";
    case CompensationSpace::none: return "none";
  }
  return "none";
}

DerivativeMode derivative_mode_from_string(const std::string& s) {
  if (s == "analytical") return DerivativeMode::analytical;
  if (s == "numerical") return DerivativeMode::numerical;
  raise(Errc::invalid_spec, "unknown derivative mode '" + s + "'");
}

CompensationSpace compensation_space_from_string(const std::string& s) {
  if (s == "output") return CompensationSpace::output;
  if (s == "hidden") return CompensationSpace::hidden;
  if (s == "none") return CompensationSpace::none;
  raise(Errc::invalid_spec, "unknown compensation space '" + s + "'");
}

std::optional<ValidationIssue> validate_trajectory(const Trajectory& traj) {
  const int n_points = traj.grid.size();
  if (n_points < 2) {
    return ValidationIssue{Errc::invariant_violation,
                           "trajectory needs at least two grid points"};
  }
  for (int k = 0; k + 1 < n_points; ++k) {
    if (!(traj.grid.points[k] < traj.grid.points[k + 1])) {
      return ValidationIssue{Errc::non_monotone_time,
                             "time stamps must be strictly increasing at index " +
                                 std::to_string(k + 1)};
    }
  }
  for (double t : traj.grid.points) {
    if (!std::isfinite(t)) {
      return ValidationIssue{Errc::non_monotone_time, "non-finite time stamp"};
    }
  }
  if (traj.dim < 1) {
    return ValidationIssue{Errc::dimension_mismatch, "dim must be >= 1"};
  }
  if (static_cast<int>(traj.values.size()) != n_points) {
    return ValidationIssue{Errc::length_mismatch,
                           "values count does not match grid size"};
  }
  for (int k = 0; k < n_points; ++k) {
    if (static_cast<int>(traj.values[k].size()) != traj.dim) {
      return ValidationIssue{Errc::dimension_mismatch,
                             "value at index " + std::to_string(k) +
                                 " has wrong dimension"};
    }
    for (double v : traj.values[k]) {
      if (!std::isfinite(v)) {
        return ValidationIssue{Errc::non_finite_state,
                               "non-finite value at index " + std::to_string(k)};
      }
    }
  }
  if (static_cast<int>(traj.observed.size()) != n_points) {
    return ValidationIssue{Errc::length_mismatch,
                           "observed mask does not match grid size"};
  }
  if (!traj.observed.front() || !traj.observed.back()) {
    return ValidationIssue{Errc::endpoint_not_observed,
                           "first and last grid points must be observed"};
  }
  return std::nullopt;
}

void require_valid(const Trajectory& traj) {
  if (auto issue = validate_trajectory(traj)) {
    raise(issue->code, issue->message);
  }
}

void validate_config(const RunConfig& cfg) {
  if (cfg.hidden_dim < 1) raise(Errc::invalid_spec, "hidden_dim must be >= 1");
  if (cfg.substeps < 1) raise(Errc::invalid_spec, "substeps must be >= 1");
  if (!(cfg.alpha >= 0.0)) raise(Errc::invalid_spec, "alpha must be >= 0");
  if (!(cfg.numerical_delta > 0.0)) {
    raise(Errc::invalid_spec, "numerical_delta must be > 0");
  }
  if (!(cfg.learning_rate > 0.0)) raise(Errc::invalid_spec, "learning_rate must be > 0");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0)) raise(Errc::invalid_spec, "beta1 out of range");
  if (!(cfg.beta2 >= 0.0 && cfg.beta2 <= 1.0)) raise(Errc::invalid_spec, "beta2 out of range");
  for (int w : cfg.f_hidden) {
    if (w < 1) raise(Errc::invalid_spec, "f_hidden widths must be >= 1");
  }
  for (int w : cfg.g_hidden) {
    if (w < 1) raise(Errc::invalid_spec, "g_hidden widths must be >= 1");
  }
  if (cfg.cell_input_embed < 0) raise(Errc::invalid_spec, "cell_input_embed must be >= 0");
}

}  // namespace cssc
