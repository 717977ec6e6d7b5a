#pragma once

#include <span>
#include <vector>

#include "cssc/core.hpp"
#include "cssc/mlp.hpp"
#include "cssc/spline.hpp"
#include "cssc/tape.hpp"

namespace cssc {

/// Latent ODE with jump updates at observations. Between observed knots the
/// hidden state follows dh/dt = f(h) under fixed-step RK4; at each knot a
/// gated cell folds the observation in, making h right-continuous with a
/// jump at every knot. The decoder g reads the state out. On top of the raw
/// readout, a per-interval cubic correction removes the knot jumps and their
/// first two derivative discontinuities, either in output space or in hidden
/// space.
///
/// All evaluation runs on a Tape so the same pass serves inference (read the
/// values) and training (run backward from a loss node).
class OdeRnnModel {
 public:
  OdeRnnModel(RunConfig cfg, int data_dim);

  const RunConfig& config() const { return cfg_; }
  int data_dim() const { return data_dim_; }
  int hidden_dim() const { return cfg_.hidden_dim; }

  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  const Mlp& dynamics() const { return f_; }
  const Mlp& decoder() const { return g_; }
  const GruCell& cell() const { return cell_; }

  /// Xavier weights, zero biases, seeded from the config.
  void init_params();

  /// One taped pass over a trajectory's observed knots, with hidden states
  /// recorded at the requested times. Knot-side decodes and one-sided
  /// derivative nodes are prepared according to `space` (the compensation
  /// target), so a model trained one way can be evaluated another.
  struct Pass {
    CompensationSpace space = CompensationSpace::output;
    TimeGrid knots;                        // observed times
    std::vector<std::vector<double>> x;    // observed values per knot
    std::vector<double> times;             // requested evaluation times

    std::vector<ad::NodeId> x_node;          // per knot, constant
    std::vector<ad::NodeId> h_minus, h_plus; // per knot; h_minus[0] is the zero start state
    std::vector<ad::NodeId> o_minus, o_plus; // decoder at knot sides (output/none spaces)

    // One-sided first and second time derivatives of the compensated field's
    // base curve at each knot: decoder output in output space, the hidden
    // state itself in hidden space. Minus-side slot 0 is kNoNode (t_0 has no
    // left limit); in none space all four stay empty.
    std::vector<ad::NodeId> dot_minus, dot_plus, ddot_minus, ddot_plus;

    std::vector<ad::NodeId> h_at;   // per requested time
    std::vector<int> interval_of;   // containing piece, ties to the right, t_n -> last
    std::vector<int> at_knot;       // knot index when the time is a knot, else -1

    double delta = 0.0;  // probe spacing actually used (numerical mode)
  };

  Pass forward(ad::Tape& t, const Trajectory& traj, std::span<const double> times,
               CompensationSpace space) const;

  /// The compensated readout at the pass's requested times. In output space
  /// o_hat = o + c with c the solved cubic over data dimensions; in hidden
  /// space o_hat = g(h + c) with c over hidden dimensions; with compensation
  /// off o_hat is the raw right-continuous readout and comp stays kNoNode.
  struct Compensated {
    std::vector<ad::NodeId> o_hat;  // per requested time, data_dim
    std::vector<ad::NodeId> comp;   // per requested time, the correction c

    // Assembly inputs, exposed for diagnostics: per-knot vector nodes
    // (kNoNode outside each quantity's defined range) and per-dimension
    // boundary moments.
    std::vector<ad::NodeId> eps_plus, eps_minus, dot_jump, ddot_jump;
    std::vector<ad::NodeId> m0, mn;
  };

  Compensated compensate(ad::Tape& t, const Pass& pass) const;

 private:
  RunConfig cfg_;
  int data_dim_ = 0;
  ParamStore store_;
  Mlp f_, g_;
  GruCell cell_;
};

/// Reads the assembly nodes back into plain arrays (kNoNode slots read as
/// zero), giving the same structure the double-path solver consumes.
KnotData read_knot_data(const ad::Tape& t, const OdeRnnModel::Pass& pass,
                        const OdeRnnModel::Compensated& comp);

/// Boundary moments actually used by a compensated pass.
BoundaryMoments read_boundary_moments(const ad::Tape& t,
                                      const OdeRnnModel::Compensated& comp);

}  // namespace cssc
