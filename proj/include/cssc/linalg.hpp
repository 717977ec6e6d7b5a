#pragma once

#include <span>
#include <vector>

namespace cssc {

/// Tridiagonal system A x = rhs with diag of length s, sub/sup of length s-1.
/// sub[i] multiplies x_{i-1} in row i, sup[i] multiplies x_{i+1} in row i.
struct TridiagonalSystem {
  std::vector<double> sub;
  std::vector<double> diag;
  std::vector<double> sup;
  std::vector<double> rhs;

  int size() const { return static_cast<int>(diag.size()); }
  bool diagonally_dominant() const;  // strict row dominance
};

/// Precomputed elimination factors for one tridiagonal matrix, reusable
/// across many right-hand sides (and across the transposed system). The
/// constructor rejects matrices that are not strictly diagonally dominant,
/// which is what justifies elimination without pivoting.
class TridiagonalFactorization {
 public:
  TridiagonalFactorization() = default;
  TridiagonalFactorization(std::vector<double> sub, std::vector<double> diag,
                           std::vector<double> sup);

  int size() const { return static_cast<int>(diag_.size()); }

  void solve_into(std::span<const double> rhs, std::span<double> out) const;
  void solve_transposed_into(std::span<const double> rhs, std::span<double> out) const;
  std::vector<double> solve(std::span<const double> rhs) const;
  std::vector<double> solve_transposed(std::span<const double> rhs) const;

 private:
  std::vector<double> sub_, diag_, sup_;
  std::vector<double> csup_, cden_;    // forward-sweep factors for A
  std::vector<double> csupT_, cdenT_;  // forward-sweep factors for A^T
};

/// O(s) elimination for one system; checks strict diagonal dominance.
std::vector<double> solve_thomas(const TridiagonalSystem& sys);

/// Solves A^T y = rhs for the same system description (adjoint pass of the
/// compensation solve). The system's own rhs field is ignored.
std::vector<double> solve_thomas_transposed(const TridiagonalSystem& sys,
                                            std::span<const double> rhs);

/// Dense Gaussian elimination with partial pivoting. Reference oracle for
/// the tridiagonal path; O(s^3), no structure exploited. matrix is row-major
/// square.
std::vector<double> solve_dense(std::vector<std::vector<double>> matrix,
                                std::vector<double> rhs);

/// Expands a tridiagonal description to its dense square matrix.
std::vector<std::vector<double>> to_dense(const TridiagonalSystem& sys);

}  // namespace cssc
