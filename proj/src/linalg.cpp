#include "cssc/linalg.hpp"

#include <cmath>
#include <cstddef>

#include "cssc/errors.hpp"

namespace cssc {

namespace {

void check_shapes(const std::vector<double>& sub, const std::vector<double>& diag,
                  const std::vector<double>& sup) {
  const std::size_t s = diag.size();
  const std::size_t off = s == 0 ? 0 : s - 1;
  if (sub.size() != off || sup.size() != off) {
    raise(Errc::length_mismatch, "tridiagonal bands must have size s-1");
  }
}

void check_dominance(const std::vector<double>& sub, const std::vector<double>& diag,
                     const std::vector<double>& sup) {
  const int s = static_cast<int>(diag.size());
  for (int i = 0; i < s; ++i) {
    const double lo = i > 0 ? std::abs(sub[i - 1]) : 0.0;
    const double hi = i + 1 < s ? std::abs(sup[i]) : 0.0;
    if (!(std::abs(diag[i]) > lo + hi)) {
      raise(Errc::not_diagonally_dominant,
            "row " + std::to_string(i) + " is not strictly dominant");
    }
  }
}

// Forward sweep factors: csup[i] = sup[i]/den[i], den[i] = diag[i] - sub[i-1]*csup[i-1].
void sweep_factors(const std::vector<double>& sub, const std::vector<double>& diag,
                   const std::vector<double>& sup, std::vector<double>& csup,
                   std::vector<double>& cden) {
  const int s = static_cast<int>(diag.size());
  csup.assign(s == 0 ? 0 : s - 1, 0.0);
  cden.assign(s, 0.0);
  if (s == 0) return;
  cden[0] = diag[0];
  if (s > 1) csup[0] = sup[0] / cden[0];
  for (int i = 1; i < s; ++i) {
    cden[i] = diag[i] - sub[i - 1] * csup[i - 1];
    if (i + 1 < s) csup[i] = sup[i] / cden[i];
  }
}

void sweep_solve(const std::vector<double>& sub, const std::vector<double>& csup,
                 const std::vector<double>& cden, std::span<const double> rhs,
                 std::span<double> out) {
  const int s = static_cast<int>(cden.size());
  if (static_cast<int>(rhs.size()) != s || static_cast<int>(out.size()) != s) {
    raise(Errc::length_mismatch, "rhs size does not match system size");
  }
  if (s == 0) return;
  // Forward sweep
  out[0] = rhs[0] / cden[0];
  for (int i = 1; i < s; ++i) {
    out[i] = (rhs[i] - sub[i - 1] * out[i - 1]) / cden[i];
  }
  // Back substitution
  for (int i = s - 2; i >= 0; --i) {
    out[i] -= csup[i] * out[i + 1];
  }
}

}  // namespace

bool TridiagonalSystem::diagonally_dominant() const {
  const int s = size();
  for (int i = 0; i < s; ++i) {
    const double lo = i > 0 ? std::abs(sub[i - 1]) : 0.0;
    const double hi = i + 1 < s ? std::abs(sup[i]) : 0.0;
    if (!(std::abs(diag[i]) > lo + hi)) return false;
  }
  return true;
}

TridiagonalFactorization::TridiagonalFactorization(std::vector<double> sub,
                                                   std::vector<double> diag,
                                                   std::vector<double> sup)
    : sub_(std::move(sub)), diag_(std::move(diag)), sup_(std::move(sup)) {
  check_shapes(sub_, diag_, sup_);
  check_dominance(sub_, diag_, sup_);
  sweep_factors(sub_, diag_, sup_, csup_, cden_);
  // A^T swaps the roles of the bands.
  sweep_factors(sup_, diag_, sub_, csupT_, cdenT_);
}

void TridiagonalFactorization::solve_into(std::span<const double> rhs,
                                          std::span<double> out) const {
  sweep_solve(sub_, csup_, cden_, rhs, out);
}

void TridiagonalFactorization::solve_transposed_into(std::span<const double> rhs,
                                                     std::span<double> out) const {
  sweep_solve(sup_, csupT_, cdenT_, rhs, out);
}

std::vector<double> TridiagonalFactorization::solve(std::span<const double> rhs) const {
  std::vector<double> out(rhs.size());
  solve_into(rhs, out);
  return out;
}

std::vector<double> TridiagonalFactorization::solve_transposed(
    std::span<const double> rhs) const {
  std::vector<double> out(rhs.size());
  solve_transposed_into(rhs, out);
  return out;
}

std::vector<double> solve_thomas(const TridiagonalSystem& sys) {
  if (static_cast<int>(sys.rhs.size()) != sys.size()) {
    raise(Errc::length_mismatch, "rhs size does not match system size");
  }
  TridiagonalFactorization fac(sys.sub, sys.diag, sys.sup);
  return fac.solve(sys.rhs);
}

std::vector<double> solve_thomas_transposed(const TridiagonalSystem& sys,
                                            std::span<const double> rhs) {
  TridiagonalFactorization fac(sys.sub, sys.diag, sys.sup);
  return fac.solve_transposed(rhs);
}

std::vector<double> solve_dense(std::vector<std::vector<double>> m,
                                std::vector<double> rhs) {
  const int s = static_cast<int>(m.size());
  if (static_cast<int>(rhs.size()) != s) {
    raise(Errc::length_mismatch, "rhs size does not match matrix size");
  }
  for (const auto& row : m) {
    if (static_cast<int>(row.size()) != s) {
      raise(Errc::length_mismatch, "matrix is not square");
    }
  }
  // Scale reference for the singularity threshold.
  double scale = 0.0;
  for (const auto& row : m) {
    for (double v : row) scale = std::max(scale, std::abs(v));
  }
  const double tiny = 1e-13 * (scale > 0.0 ? scale : 1.0);

  for (int col = 0; col < s; ++col) {
    int pivot = col;
    for (int r = col + 1; r < s; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (std::abs(m[pivot][col]) <= tiny) {
      raise(Errc::singular_matrix, "pivot below threshold at column " + std::to_string(col));
    }
    if (pivot != col) {
      std::swap(m[pivot], m[col]);
      std::swap(rhs[pivot], rhs[col]);
    }
    for (int r = col + 1; r < s; ++r) {
      const double factor = m[r][col] / m[col][col];
      if (factor == 0.0) continue;
      for (int c = col; c < s; ++c) m[r][c] -= factor * m[col][c];
      rhs[r] -= factor * rhs[col];
    }
  }
  std::vector<double> x(static_cast<std::size_t>(s), 0.0);
  for (int r = s - 1; r >= 0; --r) {
    double acc = rhs[r];
    for (int c = r + 1; c < s; ++c) acc -= m[r][c] * x[c];
    x[r] = acc / m[r][r];
  }
  return x;
}

std::vector<std::vector<double>> to_dense(const TridiagonalSystem& sys) {
  const int s = sys.size();
  std::vector<std::vector<double>> m(static_cast<std::size_t>(s),
                                     std::vector<double>(static_cast<std::size_t>(s), 0.0));
  for (int i = 0; i < s; ++i) {
    m[i][i] = sys.diag[i];
    if (i > 0) m[i][i - 1] = sys.sub[i - 1];
    if (i + 1 < s) m[i][i + 1] = sys.sup[i];
  }
  return m;
}

}  // namespace cssc
