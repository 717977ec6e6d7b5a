#pragma once

#include <span>
#include <vector>

#include "cssc/errors.hpp"

namespace cssc::detail {

// Single-source algebra for the compensation cubic. The same formulas serve
// the plain double path and the autodiff path: S only needs S+S, S-S,
// S*double and S/double. All grid-derived coefficients stay plain doubles.
//
// Knot inputs, per dimension, indexed k = 0..n over the knot grid:
//   eps_plus[k]   value error against the right limit, used for k = 0..n-1
//   eps_minus[k]  value error against the left limit, used for k = 1..n
//   dot_jump[k]   first-derivative jump, used for k = 1..n-1
//   ddot_jump[k]  second-derivative jump, used for k = 1..n-1; slot n feeds
//                 the last piece's end moment (zero under the strict
//                 boundary, where the end moment moves into mn instead)
//
// The interior moments M_1..M_{n-1} solve the row equations
//   mu_k M_{k-1} + 2 M_k + lambda_k M_{k+1} = d_k ,
// with boundary moments m0, mn moved onto the right-hand side when nonzero.

template <class S>
struct PieceCoeffs {
  S a3, a2, a1, a0;  // c(t) = a3 u^3 + a2 u^2 + a1 u + a0, u = t - t_k
};

/// d_1..d_{n-1} including boundary-moment corrections. Empty when n == 1.
template <class S>
std::vector<S> compensation_rhs(const std::vector<double>& tau,
                                std::span<const S> eps_plus,
                                std::span<const S> eps_minus,
                                std::span<const S> dot_jump,
                                std::span<const S> ddot_jump,
                                const S& m0, const S& mn) {
  const int n = static_cast<int>(tau.size());
  std::vector<S> d;
  if (n <= 1) return d;
  d.reserve(static_cast<std::size_t>(n - 1));
  for (int k = 1; k <= n - 1; ++k) {
    const double tsum = tau[k - 1] + tau[k];
    // Divided differences of the value errors on the two adjacent intervals.
    S dd_right = (eps_minus[k + 1] - eps_plus[k]) / tau[k];
    S dd_left = (eps_minus[k] - eps_plus[k - 1]) / tau[k - 1];
    S dk = (dd_right - dd_left) * (6.0 / tsum) + dot_jump[k] * (6.0 / tsum) -
           ddot_jump[k] * (2.0 * tau[k - 1] / tsum) -
           ddot_jump[k + 1] * (tau[k] / tsum);
    if (k == 1) dk = dk - m0 * (tau[0] / tsum);
    if (k == n - 1) dk = dk - mn * (tau[n - 1] / tsum);
    d.push_back(dk);
  }
  return d;
}

/// Piece coefficients for intervals k = 0..n-1 from the solved interior
/// moments (length n-1) plus the boundary moments.
template <class S>
std::vector<PieceCoeffs<S>> compensation_pieces(const std::vector<double>& tau,
                                                std::span<const S> eps_plus,
                                                std::span<const S> eps_minus,
                                                std::span<const S> ddot_jump,
                                                std::span<const S> interior_moments,
                                                const S& m0, const S& mn) {
  const int n = static_cast<int>(tau.size());
  if (static_cast<int>(interior_moments.size()) != n - 1) {
    raise(Errc::length_mismatch, "interior moment count must be n-1");
  }
  auto moment = [&](int k) -> const S& {
    if (k == 0) return m0;
    if (k == n) return mn;
    return interior_moments[k - 1];
  };
  std::vector<PieceCoeffs<S>> pieces;
  pieces.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double tk = tau[k];
    S m_end = moment(k + 1) + ddot_jump[k + 1];  // second derivative of c at the piece's right end
    S a3 = (m_end - moment(k)) / (6.0 * tk);
    S a2 = moment(k) * 0.5;
    S a1 = (eps_minus[k + 1] - eps_plus[k]) / tk -
           (m_end + moment(k) * 2.0) * (tk / 6.0);
    S a0 = eps_plus[k];
    pieces.push_back(PieceCoeffs<S>{a3, a2, a1, a0});
  }
  return pieces;
}

template <class S>
S piece_value(const PieceCoeffs<S>& p, double u) {
  return ((p.a3 * u + p.a2) * u + p.a1) * u + p.a0;
}

template <class S>
S piece_derivative(const PieceCoeffs<S>& p, double u, int order) {
  switch (order) {
    case 0: return piece_value(p, u);
    case 1: return (p.a3 * (3.0 * u) + p.a2 * 2.0) * u + p.a1;
    case 2: return p.a3 * (6.0 * u) + p.a2 * 2.0;
    case 3: return p.a3 * 6.0;
    default: raise(Errc::invalid_spec, "derivative order must be 0..3");
  }
}

}  // namespace cssc::detail
