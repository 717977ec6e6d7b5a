#include "cssc/spline.hpp"

#include <algorithm>
#include <cmath>

namespace cssc {

namespace {

void check_knot_data(const KnotData& kd) {
  const int n_points = kd.grid.size();
  if (n_points < 2) raise(Errc::incomplete_knot_data, "knot grid needs at least two points");
  if (!kd.grid.strictly_increasing()) {
    raise(Errc::non_monotone_time, "knot times must be strictly increasing");
  }
  if (kd.dim < 1) raise(Errc::incomplete_knot_data, "dim must be >= 1");
  auto check = [&](const std::vector<std::vector<double>>& a, const char* name) {
    if (static_cast<int>(a.size()) != kd.dim) {
      raise(Errc::incomplete_knot_data, std::string(name) + " must have one array per dimension");
    }
    for (const auto& v : a) {
      if (static_cast<int>(v.size()) != n_points) {
        raise(Errc::incomplete_knot_data, std::string(name) + " arrays must have size n+1");
      }
    }
  };
  check(kd.eps_plus, "eps_plus");
  check(kd.eps_minus, "eps_minus");
  check(kd.dot_jump, "dot_jump");
  check(kd.ddot_jump, "ddot_jump");
}

// Interval-length couplings for interior rows k = 1..n-1.
void build_bands(const std::vector<double>& tau, std::vector<double>& sub,
                 std::vector<double>& diag, std::vector<double>& sup) {
  const int n = static_cast<int>(tau.size());
  const int s = n - 1;
  diag.assign(std::max(0, s), 2.0);
  sub.assign(std::max(0, s - 1), 0.0);
  sup.assign(std::max(0, s - 1), 0.0);
  for (int k = 2; k <= n - 1; ++k) {
    sub[k - 2] = tau[k - 1] / (tau[k - 1] + tau[k]);
  }
  for (int k = 1; k <= n - 2; ++k) {
    sup[k - 1] = tau[k] / (tau[k - 1] + tau[k]);
  }
}

}  // namespace

KnotData KnotData::zeros(TimeGrid grid, int dim) {
  KnotData kd;
  const std::size_t np = grid.points.size();
  kd.grid = std::move(grid);
  kd.dim = dim;
  kd.eps_plus.assign(dim, std::vector<double>(np, 0.0));
  kd.eps_minus.assign(dim, std::vector<double>(np, 0.0));
  kd.dot_jump.assign(dim, std::vector<double>(np, 0.0));
  kd.ddot_jump.assign(dim, std::vector<double>(np, 0.0));
  return kd;
}

double CompensationSpline::piece_eval(int dim_index, int k, double t, int order) const {
  const double u = t - grid.time(k);
  return detail::piece_derivative(pieces[dim_index][k], u, order);
}

int locate_interval(const TimeGrid& grid, double t) {
  if (t < grid.front() || t > grid.back()) {
    raise(Errc::out_of_domain, "query time outside the knot span");
  }
  auto it = std::upper_bound(grid.points.begin(), grid.points.end(), t);
  int k = static_cast<int>(it - grid.points.begin()) - 1;
  if (k > grid.intervals() - 1) k = grid.intervals() - 1;  // t == t_n
  if (k < 0) k = 0;
  return k;
}

TridiagonalSystem moment_system_bands(const TimeGrid& grid) {
  if (!grid.strictly_increasing() || grid.size() < 2) {
    raise(Errc::non_monotone_time, "moment system needs a strictly increasing grid");
  }
  TridiagonalSystem sys;
  build_bands(grid.interval_lengths(), sys.sub, sys.diag, sys.sup);
  sys.rhs.assign(sys.diag.size(), 0.0);
  return sys;
}

TridiagonalSystem assemble_system(const KnotData& knots, int dim_index) {
  check_knot_data(knots);
  if (dim_index < 0 || dim_index >= knots.dim) {
    raise(Errc::dimension_mismatch, "dim_index out of range");
  }
  const std::vector<double> tau = knots.grid.interval_lengths();
  TridiagonalSystem sys;
  build_bands(tau, sys.sub, sys.diag, sys.sup);
  const double zero = 0.0;
  sys.rhs = detail::compensation_rhs<double>(
      tau, knots.eps_plus[dim_index], knots.eps_minus[dim_index],
      knots.dot_jump[dim_index], knots.ddot_jump[dim_index], zero, zero);
  return sys;
}

CompensationSpline solve_compensation(const KnotData& knots,
                                      const BoundaryMoments& boundary) {
  check_knot_data(knots);
  const int n = knots.grid.intervals();
  const std::vector<double> tau = knots.grid.interval_lengths();

  auto boundary_value = [&](const std::vector<double>& v, int d) -> double {
    if (v.empty()) return 0.0;
    if (static_cast<int>(v.size()) != knots.dim) {
      raise(Errc::dimension_mismatch, "boundary moments must match dim");
    }
    return v[d];
  };

  std::vector<double> sub, diag, sup;
  build_bands(tau, sub, diag, sup);
  TridiagonalFactorization fac(sub, diag, sup);

  CompensationSpline out;
  out.grid = knots.grid;
  out.dim = knots.dim;
  out.pieces.resize(knots.dim);
  out.moments.resize(knots.dim);

  for (int d = 0; d < knots.dim; ++d) {
    const double m0 = boundary_value(boundary.m0, d);
    const double mn = boundary_value(boundary.mn, d);
    std::vector<double> rhs = detail::compensation_rhs<double>(
        tau, knots.eps_plus[d], knots.eps_minus[d], knots.dot_jump[d],
        knots.ddot_jump[d], m0, mn);
    std::vector<double> interior = fac.solve(rhs);
    out.pieces[d] = detail::compensation_pieces<double>(
        tau, knots.eps_plus[d], knots.eps_minus[d], knots.ddot_jump[d],
        interior, m0, mn);
    out.moments[d].reserve(static_cast<std::size_t>(n) + 1);
    out.moments[d].push_back(m0);
    out.moments[d].insert(out.moments[d].end(), interior.begin(), interior.end());
    out.moments[d].push_back(mn);
  }
  return out;
}

std::vector<double> eval_compensation(const CompensationSpline& spline, double t) {
  const int k = locate_interval(spline.grid, t);
  std::vector<double> v(static_cast<std::size_t>(spline.dim));
  for (int d = 0; d < spline.dim; ++d) v[d] = spline.piece_eval(d, k, t, 0);
  return v;
}

std::vector<double> eval_compensation_deriv(const CompensationSpline& spline,
                                            double t, int order) {
  if (order < 0 || order > 3) raise(Errc::invalid_spec, "derivative order must be 0..3");
  std::vector<double> v(static_cast<std::size_t>(spline.dim));
  if (order == 2 && t == spline.grid.back()) {
    for (int d = 0; d < spline.dim; ++d) v[d] = spline.moments[d].back();
    return v;
  }
  const int k = locate_interval(spline.grid, t);
  for (int d = 0; d < spline.dim; ++d) v[d] = spline.piece_eval(d, k, t, order);
  return v;
}

CompensationSpline natural_spline(const Trajectory& traj) {
  require_valid(traj);
  const std::vector<int> obs = traj.observed_indices();
  const int n_knots = static_cast<int>(obs.size());
  if (n_knots < 2) raise(Errc::incomplete_knot_data, "need at least two observed points");

  TimeGrid grid;
  grid.points.reserve(static_cast<std::size_t>(n_knots));
  for (int idx : obs) grid.points.push_back(traj.grid.time(idx));

  KnotData kd = KnotData::zeros(std::move(grid), traj.dim);
  for (int j = 0; j < n_knots; ++j) {
    for (int d = 0; d < traj.dim; ++d) {
      const double x = traj.values[obs[j]][d];
      kd.eps_plus[d][j] = x;   // zero base curve: the value error is the value
      kd.eps_minus[d][j] = x;
    }
  }
  return solve_compensation(kd);
}

}  // namespace cssc
