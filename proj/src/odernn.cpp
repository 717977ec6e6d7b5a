#include "cssc/odernn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "cssc/errors.hpp"

namespace cssc {
namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// One classic RK4 step of width dt. Stage states are linear combinations on
// the tape, so gradients flow through the whole unrolled integration.
ad::NodeId rk4_step(ad::Tape& t, const Mlp& f, ad::NodeId h, double dt) {
  const ad::NodeId k1 = f.forward(t, h);
  const std::array<double, 2> half{1.0, 0.5 * dt};
  const std::array<ad::NodeId, 2> s2{h, k1};
  const ad::NodeId k2 = f.forward(t, t.lincomb(s2, half));
  const std::array<ad::NodeId, 2> s3{h, k2};
  const ad::NodeId k3 = f.forward(t, t.lincomb(s3, half));
  const std::array<ad::NodeId, 2> s4{h, k3};
  const std::array<double, 2> full{1.0, dt};
  const ad::NodeId k4 = f.forward(t, t.lincomb(s4, full));
  const std::array<ad::NodeId, 5> s5{h, k1, k2, k3, k4};
  const std::array<double, 5> w{1.0, dt / 6.0, dt / 3.0, dt / 3.0, dt / 6.0};
  return t.lincomb(s5, w);
}

}  // namespace

OdeRnnModel::OdeRnnModel(RunConfig cfg, int data_dim)
    : cfg_(std::move(cfg)), data_dim_(data_dim) {
  validate_config(cfg_);
  if (data_dim_ < 1) raise(Errc::invalid_spec, "data dimension must be positive");

  std::vector<int> f_dims;
  f_dims.push_back(cfg_.hidden_dim);
  f_dims.insert(f_dims.end(), cfg_.f_hidden.begin(), cfg_.f_hidden.end());
  f_dims.push_back(cfg_.hidden_dim);
  f_ = Mlp(store_, "f", f_dims);

  std::vector<int> g_dims;
  g_dims.push_back(cfg_.hidden_dim);
  g_dims.insert(g_dims.end(), cfg_.g_hidden.begin(), cfg_.g_hidden.end());
  g_dims.push_back(data_dim_);
  g_ = Mlp(store_, "g", g_dims);

  cell_ = GruCell(store_, "cell", cfg_.hidden_dim, data_dim_, cfg_.cell_input_embed);
}

void OdeRnnModel::init_params() {
  Rng rng(cfg_.seed);
  f_.init(store_, rng);
  g_.init(store_, rng);
  cell_.init(store_, rng);
}

OdeRnnModel::Pass OdeRnnModel::forward(ad::Tape& t, const Trajectory& traj,
                                       std::span<const double> times,
                                       CompensationSpace space) const {
  require_valid(traj);
  if (traj.dim != data_dim_) {
    raise(Errc::dimension_mismatch, "trajectory dimension differs from the model");
  }

  Pass pass;
  pass.space = space;
  const std::vector<int> obs = traj.observed_indices();
  pass.knots.points.reserve(obs.size());
  for (int idx : obs) {
    pass.knots.points.push_back(traj.grid.time(idx));
    pass.x.push_back(traj.values[static_cast<std::size_t>(idx)]);
  }
  pass.times.assign(times.begin(), times.end());

  const int n = pass.knots.intervals();
  const std::vector<double> tau = pass.knots.interval_lengths();
  const int m = cfg_.hidden_dim;

  const bool probes = space == CompensationSpace::output &&
                      cfg_.derivative_mode == DerivativeMode::numerical;
  if (probes) {
    const double min_tau = *std::min_element(tau.begin(), tau.end());
    pass.delta = std::min(cfg_.numerical_delta, 0.25 * min_tau);
    if (!(pass.delta > 0.0)) raise(Errc::invalid_spec, "probe spacing must be positive");
    for (double w : tau) {
      if (w <= 2.0 * pass.delta) {
        raise(Errc::interval_too_short, "knot interval too short for derivative probes");
      }
    }
  }

  // Sort the requested times into knot hits and interior records.
  pass.interval_of.resize(pass.times.size());
  pass.at_knot.assign(pass.times.size(), -1);
  pass.h_at.assign(pass.times.size(), ad::kNoNode);
  std::vector<std::map<double, ad::NodeId>> rec(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < pass.times.size(); ++i) {
    const double ti = pass.times[i];
    const int k = locate_interval(pass.knots, ti);
    pass.interval_of[i] = k;
    const auto it = std::lower_bound(pass.knots.points.begin(), pass.knots.points.end(), ti);
    if (it != pass.knots.points.end() && *it == ti) {
      pass.at_knot[i] = static_cast<int>(it - pass.knots.points.begin());
    } else {
      rec[static_cast<std::size_t>(k)].emplace(ti, ad::kNoNode);
    }
  }

  // Probe times are just more recorded states; compute each value once so
  // insertion and lookup agree bit for bit.
  std::vector<std::array<double, 2>> probe_right(static_cast<std::size_t>(n) + 1);
  std::vector<std::array<double, 2>> probe_left(static_cast<std::size_t>(n) + 1);
  if (probes) {
    const double d = pass.delta;
    for (int k = 0; k <= n; ++k) {
      const double tk = pass.knots.time(k);
      probe_right[static_cast<std::size_t>(k)] = {tk + d, tk + 2.0 * d};
      probe_left[static_cast<std::size_t>(k)] = {tk - 2.0 * d, tk - d};
    }
    for (int k = 0; k < n; ++k) {
      auto& r = rec[static_cast<std::size_t>(k)];
      r.emplace(probe_right[static_cast<std::size_t>(k)][0], ad::kNoNode);
      r.emplace(probe_right[static_cast<std::size_t>(k)][1], ad::kNoNode);
      r.emplace(probe_left[static_cast<std::size_t>(k) + 1][0], ad::kNoNode);
      r.emplace(probe_left[static_cast<std::size_t>(k) + 1][1], ad::kNoNode);
    }
  }

  pass.x_node.resize(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    pass.x_node[static_cast<std::size_t>(k)] = t.constant(pass.x[static_cast<std::size_t>(k)]);
  }
  pass.h_minus.assign(static_cast<std::size_t>(n) + 1, ad::kNoNode);
  pass.h_plus.assign(static_cast<std::size_t>(n) + 1, ad::kNoNode);
  pass.h_minus[0] = t.zeros(m);
  pass.h_plus[0] = cell_.update(t, pass.h_minus[0], pass.x_node[0]);

  for (int k = 0; k < n; ++k) {
    const double a = pass.knots.time(k);
    const double b = pass.knots.time(k + 1);
    std::vector<double> bps;
    bps.reserve(static_cast<std::size_t>(cfg_.substeps) + rec[static_cast<std::size_t>(k)].size());
    for (int j = 1; j <= cfg_.substeps; ++j) {
      bps.push_back(j == cfg_.substeps ? b : a + (b - a) * j / cfg_.substeps);
    }
    for (const auto& [ti, node] : rec[static_cast<std::size_t>(k)]) bps.push_back(ti);
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

    ad::NodeId cur = pass.h_plus[static_cast<std::size_t>(k)];
    double tcur = a;
    for (double bp : bps) {
      cur = rk4_step(t, f_, cur, bp - tcur);
      if (!all_finite(t.value(cur))) {
        raise(Errc::non_finite_state, "hidden state left the finite range during integration");
      }
      auto it = rec[static_cast<std::size_t>(k)].find(bp);
      if (it != rec[static_cast<std::size_t>(k)].end()) it->second = cur;
      tcur = bp;
    }
    pass.h_minus[static_cast<std::size_t>(k) + 1] = cur;
    pass.h_plus[static_cast<std::size_t>(k) + 1] =
        cell_.update(t, cur, pass.x_node[static_cast<std::size_t>(k) + 1]);
  }

  // Right probes at t_n come from a short continuation past the last knot.
  std::array<ad::NodeId, 2> ext_right{ad::kNoNode, ad::kNoNode};
  if (probes) {
    ad::NodeId cur = pass.h_plus[static_cast<std::size_t>(n)];
    double tcur = pass.knots.time(n);
    for (int j = 0; j < 2; ++j) {
      const double bp = probe_right[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)];
      cur = rk4_step(t, f_, cur, bp - tcur);
      if (!all_finite(t.value(cur))) {
        raise(Errc::non_finite_state, "hidden state left the finite range during integration");
      }
      ext_right[static_cast<std::size_t>(j)] = cur;
      tcur = bp;
    }
  }

  for (std::size_t i = 0; i < pass.times.size(); ++i) {
    if (pass.at_knot[i] >= 0) {
      pass.h_at[i] = pass.h_plus[static_cast<std::size_t>(pass.at_knot[i])];
    } else {
      pass.h_at[i] =
          rec[static_cast<std::size_t>(pass.interval_of[i])].at(pass.times[i]);
    }
  }

  pass.o_minus.assign(static_cast<std::size_t>(n) + 1, ad::kNoNode);
  pass.o_plus.assign(static_cast<std::size_t>(n) + 1, ad::kNoNode);
  pass.dot_minus.assign(static_cast<std::size_t>(n) + 1, ad::kNoNode);
  pass.dot_plus.assign(static_cast<std::size_t>(n) + 1, ad::kNoNode);
  pass.ddot_minus.assign(static_cast<std::size_t>(n) + 1, ad::kNoNode);
  pass.ddot_plus.assign(static_cast<std::size_t>(n) + 1, ad::kNoNode);

  const bool want_ddot = !cfg_.drop_ddot_o;

  if (space == CompensationSpace::none) {
    for (int k = 0; k <= n; ++k) {
      pass.o_plus[static_cast<std::size_t>(k)] =
          g_.forward(t, pass.h_plus[static_cast<std::size_t>(k)]);
    }
    return pass;
  }

  if (space == CompensationSpace::hidden) {
    // The compensated field is the hidden state itself: its one-sided time
    // derivatives are f(h) and, by the chain rule, J_f(h) f(h). Both are
    // exact, so the probe machinery never applies here.
    for (int k = 0; k <= n; ++k) {
      for (int side = 0; side < 2; ++side) {
        const ad::NodeId h = side == 0 ? pass.h_minus[static_cast<std::size_t>(k)]
                                       : pass.h_plus[static_cast<std::size_t>(k)];
        if (side == 0 && k == 0) continue;
        const Mlp::Activations facts = f_.forward_full(t, h);
        const ad::NodeId dot = facts.out;
        ad::NodeId ddot = ad::kNoNode;
        if (want_ddot) ddot = f_.jvp(t, facts, dot);
        if (side == 0) {
          pass.dot_minus[static_cast<std::size_t>(k)] = dot;
          pass.ddot_minus[static_cast<std::size_t>(k)] = ddot;
        } else {
          pass.dot_plus[static_cast<std::size_t>(k)] = dot;
          pass.ddot_plus[static_cast<std::size_t>(k)] = ddot;
        }
      }
      pass.o_plus[static_cast<std::size_t>(k)] =
          g_.forward(t, pass.h_plus[static_cast<std::size_t>(k)]);
    }
    return pass;
  }

  // Output space: decode both knot sides, then differentiate the decoded
  // curve either through the nets or by one-sided differences of probe
  // decodes.
  std::vector<Mlp::Activations> gacts_minus(static_cast<std::size_t>(n) + 1);
  std::vector<Mlp::Activations> gacts_plus(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    if (k > 0) {
      gacts_minus[static_cast<std::size_t>(k)] =
          g_.forward_full(t, pass.h_minus[static_cast<std::size_t>(k)]);
      pass.o_minus[static_cast<std::size_t>(k)] = gacts_minus[static_cast<std::size_t>(k)].out;
    }
    gacts_plus[static_cast<std::size_t>(k)] =
        g_.forward_full(t, pass.h_plus[static_cast<std::size_t>(k)]);
    pass.o_plus[static_cast<std::size_t>(k)] = gacts_plus[static_cast<std::size_t>(k)].out;
  }

  if (cfg_.derivative_mode == DerivativeMode::analytical) {
    for (int k = 0; k <= n; ++k) {
      for (int side = 0; side < 2; ++side) {
        if (side == 0 && k == 0) continue;
        const ad::NodeId h = side == 0 ? pass.h_minus[static_cast<std::size_t>(k)]
                                       : pass.h_plus[static_cast<std::size_t>(k)];
        const Mlp::Activations& gacts =
            side == 0 ? gacts_minus[static_cast<std::size_t>(k)]
                      : gacts_plus[static_cast<std::size_t>(k)];
        const Mlp::Activations facts = f_.forward_full(t, h);
        const ad::NodeId hdot = facts.out;
        const ad::NodeId dot = g_.jvp(t, gacts, hdot);
        ad::NodeId ddot = ad::kNoNode;
        if (want_ddot) {
          const ad::NodeId hddot = f_.jvp(t, facts, hdot);
          ddot = g_.jvp(t, gacts, hddot);
        }
        if (side == 0) {
          pass.dot_minus[static_cast<std::size_t>(k)] = dot;
          pass.ddot_minus[static_cast<std::size_t>(k)] = ddot;
        } else {
          pass.dot_plus[static_cast<std::size_t>(k)] = dot;
          pass.ddot_plus[static_cast<std::size_t>(k)] = ddot;
        }
      }
    }
  } else {
    const double d = pass.delta;
    const double d2 = d * d;
    auto decode_rec = [&](int k, double time) {
      if (k == n) {
        return g_.forward(t, time == probe_right[static_cast<std::size_t>(n)][0]
                                 ? ext_right[0]
                                 : ext_right[1]);
      }
      return g_.forward(t, rec[static_cast<std::size_t>(k)].at(time));
    };
    for (int k = 0; k <= n; ++k) {
      // Right side: forward differences from the post-update flow.
      {
        const ad::NodeId o0 = pass.o_plus[static_cast<std::size_t>(k)];
        const ad::NodeId o1 = decode_rec(k, probe_right[static_cast<std::size_t>(k)][0]);
        const std::array<ad::NodeId, 2> xs{o1, o0};
        const std::array<double, 2> cs{1.0 / d, -1.0 / d};
        pass.dot_plus[static_cast<std::size_t>(k)] = t.lincomb(xs, cs);
        if (want_ddot) {
          const ad::NodeId o2 = decode_rec(k, probe_right[static_cast<std::size_t>(k)][1]);
          const std::array<ad::NodeId, 3> xs2{o2, o1, o0};
          const std::array<double, 3> cs2{1.0 / d2, -2.0 / d2, 1.0 / d2};
          pass.ddot_plus[static_cast<std::size_t>(k)] = t.lincomb(xs2, cs2);
        }
      }
      // Left side: backward differences from the pre-update flow.
      if (k > 0) {
        const ad::NodeId o0 = pass.o_minus[static_cast<std::size_t>(k)];
        const ad::NodeId o1 = decode_rec(k - 1, probe_left[static_cast<std::size_t>(k)][1]);
        const std::array<ad::NodeId, 2> xs{o0, o1};
        const std::array<double, 2> cs{1.0 / d, -1.0 / d};
        pass.dot_minus[static_cast<std::size_t>(k)] = t.lincomb(xs, cs);
        if (want_ddot) {
          const ad::NodeId o2 = decode_rec(k - 1, probe_left[static_cast<std::size_t>(k)][0]);
          const std::array<ad::NodeId, 3> xs2{o0, o1, o2};
          const std::array<double, 3> cs2{1.0 / d2, -2.0 / d2, 1.0 / d2};
          pass.ddot_minus[static_cast<std::size_t>(k)] = t.lincomb(xs2, cs2);
        }
      }
    }
  }
  return pass;
}

OdeRnnModel::Compensated OdeRnnModel::compensate(ad::Tape& t, const Pass& pass) const {
  Compensated out;
  const std::size_t qn = pass.times.size();
  out.o_hat.assign(qn, ad::kNoNode);
  out.comp.assign(qn, ad::kNoNode);
  const int n = pass.knots.intervals();

  if (pass.space == CompensationSpace::none) {
    for (std::size_t i = 0; i < qn; ++i) {
      out.o_hat[i] = pass.at_knot[i] >= 0
                         ? pass.o_plus[static_cast<std::size_t>(pass.at_knot[i])]
                         : g_.forward(t, pass.h_at[i]);
    }
    return out;
  }

  const int sdim = pass.space == CompensationSpace::output ? data_dim_ : cfg_.hidden_dim;
  const std::size_t np = static_cast<std::size_t>(n) + 1;
  out.eps_plus.assign(np, ad::kNoNode);
  out.eps_minus.assign(np, ad::kNoNode);
  out.dot_jump.assign(np, ad::kNoNode);
  out.ddot_jump.assign(np, ad::kNoNode);

  if (pass.space == CompensationSpace::output) {
    for (int k = 0; k < n; ++k) {
      out.eps_plus[static_cast<std::size_t>(k)] =
          t.sub(pass.x_node[static_cast<std::size_t>(k)],
                pass.o_plus[static_cast<std::size_t>(k)]);
    }
    for (int k = 1; k <= n; ++k) {
      out.eps_minus[static_cast<std::size_t>(k)] =
          t.sub(pass.x_node[static_cast<std::size_t>(k)],
                pass.o_minus[static_cast<std::size_t>(k)]);
    }
  } else {
    const ad::NodeId zero_vec = t.zeros(sdim);
    for (int k = 0; k < n; ++k) out.eps_plus[static_cast<std::size_t>(k)] = zero_vec;
    for (int k = 1; k <= n; ++k) {
      out.eps_minus[static_cast<std::size_t>(k)] =
          t.sub(pass.h_plus[static_cast<std::size_t>(k)],
                pass.h_minus[static_cast<std::size_t>(k)]);
    }
  }

  const ad::NodeId zero_jump = cfg_.drop_ddot_o || cfg_.strict_natural_boundary
                                   ? t.zeros(sdim)
                                   : ad::kNoNode;
  for (int k = 1; k <= n - 1; ++k) {
    ad::NodeId dj = t.sub(pass.dot_plus[static_cast<std::size_t>(k)],
                          pass.dot_minus[static_cast<std::size_t>(k)]);
    if (cfg_.block_dot_o) dj = t.stop_gradient(dj);
    out.dot_jump[static_cast<std::size_t>(k)] = dj;
  }
  for (int k = 1; k <= n; ++k) {
    ad::NodeId ddj;
    if (cfg_.drop_ddot_o) {
      ddj = zero_jump;
    } else if (k == n && cfg_.strict_natural_boundary) {
      // Strict boundary moves the end curvature into mn; the last piece's
      // end moment then needs no jump term.
      ddj = zero_jump;
    } else {
      ddj = t.sub(pass.ddot_plus[static_cast<std::size_t>(k)],
                  pass.ddot_minus[static_cast<std::size_t>(k)]);
      if (cfg_.block_ddot_o) ddj = t.stop_gradient(ddj);
    }
    out.ddot_jump[static_cast<std::size_t>(k)] = ddj;
  }

  // Boundary moments: zero by default; strict mode cancels the base curve's
  // one-sided curvature at both ends. Dropping second derivatives forces the
  // default even in strict mode, since the curvature nodes do not exist.
  out.m0.resize(static_cast<std::size_t>(sdim));
  out.mn.resize(static_cast<std::size_t>(sdim));
  std::vector<ad::TapeScalar> m0s(static_cast<std::size_t>(sdim));
  std::vector<ad::TapeScalar> mns(static_cast<std::size_t>(sdim));
  if (cfg_.strict_natural_boundary && !cfg_.drop_ddot_o) {
    ad::NodeId m0_vec = t.scale(pass.ddot_plus[0], -1.0);
    ad::NodeId mn_vec = t.scale(pass.ddot_minus[static_cast<std::size_t>(n)], -1.0);
    if (cfg_.block_ddot_o) {
      m0_vec = t.stop_gradient(m0_vec);
      mn_vec = t.stop_gradient(mn_vec);
    }
    for (int d = 0; d < sdim; ++d) {
      m0s[static_cast<std::size_t>(d)] = {&t, t.index(m0_vec, d)};
      mns[static_cast<std::size_t>(d)] = {&t, t.index(mn_vec, d)};
    }
  } else {
    const ad::NodeId zs = t.constant(0.0);
    for (int d = 0; d < sdim; ++d) {
      m0s[static_cast<std::size_t>(d)] = {&t, zs};
      mns[static_cast<std::size_t>(d)] = {&t, zs};
    }
  }
  for (int d = 0; d < sdim; ++d) {
    out.m0[static_cast<std::size_t>(d)] = m0s[static_cast<std::size_t>(d)].id;
    out.mn[static_cast<std::size_t>(d)] = mns[static_cast<std::size_t>(d)].id;
  }

  const std::vector<double> tau = pass.knots.interval_lengths();
  int sys = -1;
  if (n >= 2) {
    TridiagonalSystem bands = moment_system_bands(pass.knots);
    sys = t.register_system(TridiagonalFactorization(bands.sub, bands.diag, bands.sup));
  }

  auto scalar_of = [&](ad::NodeId vec, int d) -> ad::TapeScalar {
    if (vec == ad::kNoNode) return {};
    return {&t, t.index(vec, d)};
  };

  std::vector<std::vector<detail::PieceCoeffs<ad::TapeScalar>>> pieces;
  pieces.reserve(static_cast<std::size_t>(sdim));
  for (int d = 0; d < sdim; ++d) {
    std::vector<ad::TapeScalar> ep(np), em(np), dj(np), ddj(np);
    for (std::size_t k = 0; k < np; ++k) {
      ep[k] = scalar_of(out.eps_plus[k], d);
      em[k] = scalar_of(out.eps_minus[k], d);
      dj[k] = scalar_of(out.dot_jump[k], d);
      ddj[k] = scalar_of(out.ddot_jump[k], d);
    }
    const std::vector<ad::TapeScalar> rhs = detail::compensation_rhs<ad::TapeScalar>(
        tau, ep, em, dj, ddj, m0s[static_cast<std::size_t>(d)],
        mns[static_cast<std::size_t>(d)]);
    std::vector<ad::TapeScalar> interior;
    if (n >= 2) {
      std::vector<ad::NodeId> rids;
      rids.reserve(rhs.size());
      for (const ad::TapeScalar& s : rhs) rids.push_back(s.id);
      const ad::NodeId m_vec = t.tridiag_solve(sys, t.concat(rids));
      interior.reserve(static_cast<std::size_t>(n) - 1);
      for (int k = 0; k < n - 1; ++k) interior.push_back({&t, t.index(m_vec, k)});
    }
    pieces.push_back(detail::compensation_pieces<ad::TapeScalar>(
        tau, ep, em, ddj, interior, m0s[static_cast<std::size_t>(d)],
        mns[static_cast<std::size_t>(d)]));
  }

  for (std::size_t i = 0; i < qn; ++i) {
    const int k = pass.interval_of[i];
    const double u = pass.times[i] - pass.knots.time(k);
    std::vector<ad::NodeId> comp_ids(static_cast<std::size_t>(sdim));
    for (int d = 0; d < sdim; ++d) {
      comp_ids[static_cast<std::size_t>(d)] =
          detail::piece_value(pieces[static_cast<std::size_t>(d)][static_cast<std::size_t>(k)],
                              u)
              .id;
    }
    const ad::NodeId c_vec = t.concat(comp_ids);
    out.comp[i] = c_vec;
    if (pass.space == CompensationSpace::output) {
      const ad::NodeId base =
          pass.at_knot[i] == n ? pass.o_minus[static_cast<std::size_t>(n)]
          : pass.at_knot[i] >= 0
              ? pass.o_plus[static_cast<std::size_t>(pass.at_knot[i])]
              : g_.forward(t, pass.h_at[i]);
      out.o_hat[i] = t.add(base, c_vec);
    } else {
      const ad::NodeId state =
          pass.at_knot[i] == n ? pass.h_minus[static_cast<std::size_t>(n)]
          : pass.at_knot[i] >= 0 ? pass.h_plus[static_cast<std::size_t>(pass.at_knot[i])]
                                 : pass.h_at[i];
      out.o_hat[i] = g_.forward(t, t.add(state, c_vec));
    }
  }
  return out;
}

KnotData read_knot_data(const ad::Tape& t, const OdeRnnModel::Pass& pass,
                        const OdeRnnModel::Compensated& comp) {
  if (comp.eps_plus.empty()) {
    raise(Errc::invalid_spec, "pass was built without a compensation assembly");
  }
  const int dim = t.length(comp.eps_plus[0]);
  KnotData kd = KnotData::zeros(pass.knots, dim);
  auto fill = [&](const std::vector<ad::NodeId>& src,
                  std::vector<std::vector<double>>& dst) {
    for (std::size_t k = 0; k < src.size(); ++k) {
      if (src[k] == ad::kNoNode) continue;
      const std::span<const double> v = t.value(src[k]);
      for (int d = 0; d < dim; ++d) {
        dst[static_cast<std::size_t>(d)][k] = v[static_cast<std::size_t>(d)];
      }
    }
  };
  fill(comp.eps_plus, kd.eps_plus);
  fill(comp.eps_minus, kd.eps_minus);
  fill(comp.dot_jump, kd.dot_jump);
  fill(comp.ddot_jump, kd.ddot_jump);
  return kd;
}

BoundaryMoments read_boundary_moments(const ad::Tape& t,
                                      const OdeRnnModel::Compensated& comp) {
  BoundaryMoments b;
  for (ad::NodeId id : comp.m0) b.m0.push_back(t.scalar(id));
  for (ad::NodeId id : comp.mn) b.mn.push_back(t.scalar(id));
  return b;
}

}  // namespace cssc
