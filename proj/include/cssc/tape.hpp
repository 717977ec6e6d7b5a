#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cssc/linalg.hpp"
#include "cssc/params.hpp"

namespace cssc::ad {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

/// Reverse-mode tape over small dense vectors (a scalar is a size-1 vector).
/// Values are computed eagerly as nodes are appended; backward() runs the
/// adjoint sweep from a scalar seed and accumulates parameter gradients into
/// a caller-provided buffer. Not thread-safe; build one tape per worker and
/// reset() between uses to recycle storage.
///
/// value() spans point into a growing arena: they are invalidated by the
/// next node append, so copy out anything held across construction.
class Tape {
 public:
  explicit Tape(const ParamStore* params = nullptr);

  // Leaves
  NodeId constant(std::span<const double> v);
  NodeId constant(double v);
  NodeId zeros(int len);

  // Parameterized affine maps; W/U/bias are ParamStore tensor ids.
  NodeId affine(int w, int bias, NodeId x);             // W x + b
  NodeId affine2(int w, NodeId a, int u, NodeId b, int bias);  // W a + U b + bias
  NodeId linear(int w, NodeId x);                       // W x
  NodeId linear_t(int w, NodeId x);                     // W^T x

  // Elementwise
  NodeId tanh(NodeId x);
  NodeId sigmoid(NodeId x);
  NodeId one_minus_sq(NodeId x);  // 1 - x^2 (tanh' given the tanh output)
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId emul(NodeId a, NodeId b);
  NodeId scale(NodeId x, double c);

  // Structure
  NodeId lincomb(std::span<const NodeId> xs, std::span<const double> coeffs);
  NodeId index(NodeId x, int i);             // size-1 slice
  NodeId concat(std::span<const NodeId> xs);
  NodeId sq_sum(NodeId x);                   // sum of squares, size-1
  NodeId stop_gradient(NodeId x);

  // Linear solve against a registered tridiagonal factorization. The matrix
  // is treated as constant; backward applies the transposed solve to the
  // output adjoint.
  int register_system(TridiagonalFactorization fac);
  NodeId tridiag_solve(int system, NodeId rhs);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int length(NodeId id) const;
  std::span<const double> value(NodeId id) const;
  double scalar(NodeId id) const;  // value of a size-1 node

  /// Adjoint sweep seeded at a size-1 node. param_grad must have
  /// ParamStore::size() entries; gradients are accumulated (+=).
  void backward(NodeId seed, std::span<double> param_grad);

  /// Drops all nodes and systems, keeps buffer capacity.
  void reset();

 private:
  enum class Op : std::uint8_t {
    kConst, kAffine, kAffine2, kLinear, kLinearT,
    kTanh, kSigmoid, kOneMinusSq, kAdd, kSub, kEMul, kScale,
    kLincomb, kIndex, kConcat, kSqSum, kStopGrad, kTridiag,
  };

  struct Node {
    Op op;
    NodeId a = kNoNode, b = kNoNode;
    std::int32_t w = -1, u = -1, bias = -1;
    std::int32_t aux = -1;   // index position / tridiag system id
    double c0 = 0.0;         // scale constant
    std::int32_t off = 0, len = 0;
    std::int32_t ext_off = 0, ext_n = 0;
  };

  NodeId push(Node n, int len);
  const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  double* val(const Node& n) { return val_.data() + n.off; }
  const double* val(const Node& n) const { return val_.data() + n.off; }
  double* grad(const Node& n) { return grad_.data() + n.off; }
  std::span<const double> pt(int tensor_id) const;
  void check_node(NodeId id) const;

  const ParamStore* params_;
  std::vector<Node> nodes_;
  std::vector<double> val_;
  std::vector<double> grad_;
  std::vector<NodeId> ext_ids_;
  std::vector<double> ext_coeffs_;
  std::vector<TridiagonalFactorization> systems_;
};

/// Size-1 node with value semantics, so scalar formulas written against a
/// generic field type can run unchanged on the tape. Supports exactly the
/// operations the piecewise algebra needs.
struct TapeScalar {
  Tape* tape = nullptr;
  NodeId id = kNoNode;

  double value() const { return tape->scalar(id); }
};

inline TapeScalar operator+(TapeScalar a, TapeScalar b) {
  return {a.tape, a.tape->add(a.id, b.id)};
}
inline TapeScalar operator-(TapeScalar a, TapeScalar b) {
  return {a.tape, a.tape->sub(a.id, b.id)};
}
inline TapeScalar operator*(TapeScalar a, double c) { return {a.tape, a.tape->scale(a.id, c)}; }
inline TapeScalar operator/(TapeScalar a, double c) {
  return {a.tape, a.tape->scale(a.id, 1.0 / c)};
}

}  // namespace cssc::ad
