#pragma once

#include <vector>

#include "cssc/core.hpp"
#include "cssc/detail/compensation_math.hpp"
#include "cssc/linalg.hpp"

namespace cssc {

/// Per-knot inputs for the compensation solve, one array set per data
/// dimension, each array sized n+1 over the knot grid. Slots outside a
/// quantity's defined range (see compensation_math.hpp) are ignored; keep
/// them zero.
struct KnotData {
  TimeGrid grid;
  int dim = 0;
  std::vector<std::vector<double>> eps_plus;
  std::vector<std::vector<double>> eps_minus;
  std::vector<std::vector<double>> dot_jump;
  std::vector<std::vector<double>> ddot_jump;

  static KnotData zeros(TimeGrid grid, int dim);
};

/// Boundary second-derivative values for the compensation, one per data
/// dimension. Empty vectors mean zeros (the natural boundary of the default
/// construction); strict mode passes the negated one-sided output curvature.
struct BoundaryMoments {
  std::vector<double> m0;
  std::vector<double> mn;
};

/// The solved compensation: piecewise cubics per dimension plus the full
/// moment sequence M_0..M_n (boundary values included).
struct CompensationSpline {
  TimeGrid grid;
  int dim = 0;
  std::vector<std::vector<detail::PieceCoeffs<double>>> pieces;  // [dim][interval]
  std::vector<std::vector<double>> moments;                      // [dim][0..n]

  /// Evaluates piece k of one dimension at absolute time t (order 0..3).
  /// No domain check: callers use this for one-sided limits at knots.
  double piece_eval(int dim_index, int k, double t, int order = 0) const;
};

/// Locates the half-open interval [t_k, t_{k+1}) containing t by binary
/// search; ties at knots resolve to the right piece, t = t_n maps to the
/// last piece. Throws Errc::out_of_domain outside [t_0, t_n].
int locate_interval(const TimeGrid& grid, double t);

/// Builds the interior moment system for one dimension of the knot data:
/// diagonal 2, couplings from adjacent interval lengths, right-hand side
/// from value-error divided differences and derivative jumps. Zero boundary
/// moments are assumed (the default construction).
TridiagonalSystem assemble_system(const KnotData& knots, int dim_index = 0);

/// Just the matrix part of the moment system for this grid (rhs zeros).
/// The bands depend only on interval lengths, so one factorization serves
/// every dimension and any right-hand side over the same grid.
TridiagonalSystem moment_system_bands(const TimeGrid& grid);

/// Solves all dimensions (sharing one factorization) and assembles pieces.
/// Boundary moments default to zero; strict mode passes explicit values.
CompensationSpline solve_compensation(const KnotData& knots,
                                      const BoundaryMoments& boundary = {});

/// Compensation value at t, all dimensions. Throws out_of_domain.
std::vector<double> eval_compensation(const CompensationSpline& spline, double t);

/// Derivative of the compensation at t (order 1..3; order 0 = value).
/// Convention: order 2 exactly at t_n reports the stored end moment M_n
/// rather than the left-limit curvature of the final piece, matching the
/// zero-end-moment construction.
std::vector<double> eval_compensation_deriv(const CompensationSpline& spline,
                                            double t, int order);

/// Classic natural cubic spline through the observed points of a trajectory,
/// obtained by running the compensation solve against a zero base curve.
CompensationSpline natural_spline(const Trajectory& traj);

}  // namespace cssc
