#include "cssc/tape.hpp"

#include <cmath>
#include <cstring>

#include "cssc/errors.hpp"

namespace cssc::ad {

Tape::Tape(const ParamStore* params) : params_(params) {}

NodeId Tape::push(Node n, int len) {
  n.off = static_cast<std::int32_t>(val_.size());
  n.len = len;
  val_.resize(val_.size() + static_cast<std::size_t>(len), 0.0);
  nodes_.push_back(n);
  return static_cast<NodeId>(nodes_.size()) - 1;
}

void Tape::check_node(NodeId id) const {
  if (id < 0 || id >= node_count()) raise(Errc::invariant_violation, "bad node id");
}

int Tape::length(NodeId id) const {
  check_node(id);
  return node(id).len;
}

std::span<const double> Tape::value(NodeId id) const {
  check_node(id);
  const Node& n = node(id);
  return std::span<const double>(val_.data() + n.off, static_cast<std::size_t>(n.len));
}

double Tape::scalar(NodeId id) const {
  check_node(id);
  if (node(id).len != 1) raise(Errc::dimension_mismatch, "scalar() needs a size-1 node");
  return val_[static_cast<std::size_t>(node(id).off)];
}

std::span<const double> Tape::pt(int tensor_id) const {
  if (!params_) raise(Errc::invariant_violation, "tape has no parameter store");
  return params_->tensor(tensor_id);
}

NodeId Tape::constant(std::span<const double> v) {
  Node n;
  n.op = Op::kConst;
  NodeId id = push(n, static_cast<int>(v.size()));
  std::memcpy(val_.data() + node(id).off, v.data(), v.size() * sizeof(double));
  return id;
}

NodeId Tape::constant(double v) { return constant(std::span<const double>(&v, 1)); }

NodeId Tape::zeros(int len) {
  Node n;
  n.op = Op::kConst;
  return push(n, len);
}

NodeId Tape::affine(int w, int bias, NodeId x) {
  check_node(x);
  if (!params_) raise(Errc::invariant_violation, "tape has no parameter store");
  const TensorInfo& wi = params_->info(w);
  if (node(x).len != wi.cols) raise(Errc::dimension_mismatch, "affine: input length != cols");
  if (params_->info(bias).rows * params_->info(bias).cols != wi.rows) {
    raise(Errc::dimension_mismatch, "affine: bias length != rows");
  }
  Node n;
  n.op = Op::kAffine;
  n.a = x;
  n.w = w;
  n.bias = bias;
  NodeId id = push(n, wi.rows);
  const double* W = pt(w).data();
  const double* b = pt(bias).data();
  const double* xv = val(node(x));
  double* y = val(node(id));
  for (int r = 0; r < wi.rows; ++r) {
    double acc = b[r];
    const double* row = W + static_cast<std::size_t>(r) * wi.cols;
    for (int c = 0; c < wi.cols; ++c) acc += row[c] * xv[c];
    y[r] = acc;
  }
  return id;
}

NodeId Tape::affine2(int w, NodeId a, int u, NodeId b, int bias) {
  check_node(a);
  check_node(b);
  if (!params_) raise(Errc::invariant_violation, "tape has no parameter store");
  const TensorInfo& wi = params_->info(w);
  const TensorInfo& ui = params_->info(u);
  if (wi.rows != ui.rows) raise(Errc::dimension_mismatch, "affine2: W/U row mismatch");
  if (node(a).len != wi.cols || node(b).len != ui.cols) {
    raise(Errc::dimension_mismatch, "affine2: input length mismatch");
  }
  if (params_->info(bias).rows * params_->info(bias).cols != wi.rows) {
    raise(Errc::dimension_mismatch, "affine2: bias length != rows");
  }
  Node n;
  n.op = Op::kAffine2;
  n.a = a;
  n.b = b;
  n.w = w;
  n.u = u;
  n.bias = bias;
  NodeId id = push(n, wi.rows);
  const double* W = pt(w).data();
  const double* U = pt(u).data();
  const double* bv = pt(bias).data();
  const double* av = val(node(a));
  const double* b2 = val(node(b));
  double* y = val(node(id));
  for (int r = 0; r < wi.rows; ++r) {
    double acc = bv[r];
    const double* wrow = W + static_cast<std::size_t>(r) * wi.cols;
    for (int c = 0; c < wi.cols; ++c) acc += wrow[c] * av[c];
    const double* urow = U + static_cast<std::size_t>(r) * ui.cols;
    for (int c = 0; c < ui.cols; ++c) acc += urow[c] * b2[c];
    y[r] = acc;
  }
  return id;
}

NodeId Tape::linear(int w, NodeId x) {
  check_node(x);
  if (!params_) raise(Errc::invariant_violation, "tape has no parameter store");
  const TensorInfo& wi = params_->info(w);
  if (node(x).len != wi.cols) raise(Errc::dimension_mismatch, "linear: input length != cols");
  Node n;
  n.op = Op::kLinear;
  n.a = x;
  n.w = w;
  NodeId id = push(n, wi.rows);
  const double* W = pt(w).data();
  const double* xv = val(node(x));
  double* y = val(node(id));
  for (int r = 0; r < wi.rows; ++r) {
    double acc = 0.0;
    const double* row = W + static_cast<std::size_t>(r) * wi.cols;
    for (int c = 0; c < wi.cols; ++c) acc += row[c] * xv[c];
    y[r] = acc;
  }
  return id;
}

NodeId Tape::linear_t(int w, NodeId x) {
  check_node(x);
  if (!params_) raise(Errc::invariant_violation, "tape has no parameter store");
  const TensorInfo& wi = params_->info(w);
  if (node(x).len != wi.rows) raise(Errc::dimension_mismatch, "linear_t: input length != rows");
  Node n;
  n.op = Op::kLinearT;
  n.a = x;
  n.w = w;
  NodeId id = push(n, wi.cols);
  const double* W = pt(w).data();
  const double* xv = val(node(x));
  double* y = val(node(id));
  for (int c = 0; c < wi.cols; ++c) y[c] = 0.0;
  for (int r = 0; r < wi.rows; ++r) {
    const double* row = W + static_cast<std::size_t>(r) * wi.cols;
    const double xr = xv[r];
    for (int c = 0; c < wi.cols; ++c) y[c] += row[c] * xr;
  }
  return id;
}

NodeId Tape::tanh(NodeId x) {
  check_node(x);
  Node n;
  n.op = Op::kTanh;
  n.a = x;
  NodeId id = push(n, node(x).len);
  const double* xv = val(node(x));
  double* y = val(node(id));
  for (int i = 0; i < node(id).len; ++i) y[i] = std::tanh(xv[i]);
  return id;
}

NodeId Tape::sigmoid(NodeId x) {
  check_node(x);
  Node n;
  n.op = Op::kSigmoid;
  n.a = x;
  NodeId id = push(n, node(x).len);
  const double* xv = val(node(x));
  double* y = val(node(id));
  for (int i = 0; i < node(id).len; ++i) y[i] = 1.0 / (1.0 + std::exp(-xv[i]));
  return id;
}

NodeId Tape::one_minus_sq(NodeId x) {
  check_node(x);
  Node n;
  n.op = Op::kOneMinusSq;
  n.a = x;
  NodeId id = push(n, node(x).len);
  const double* xv = val(node(x));
  double* y = val(node(id));
  for (int i = 0; i < node(id).len; ++i) y[i] = 1.0 - xv[i] * xv[i];
  return id;
}

NodeId Tape::add(NodeId a, NodeId b) {
  check_node(a);
  check_node(b);
  if (node(a).len != node(b).len) raise(Errc::dimension_mismatch, "add: length mismatch");
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  NodeId id = push(n, node(a).len);
  const double* av = val(node(a));
  const double* bv = val(node(b));
  double* y = val(node(id));
  for (int i = 0; i < node(id).len; ++i) y[i] = av[i] + bv[i];
  return id;
}

NodeId Tape::sub(NodeId a, NodeId b) {
  check_node(a);
  check_node(b);
  if (node(a).len != node(b).len) raise(Errc::dimension_mismatch, "sub: length mismatch");
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  NodeId id = push(n, node(a).len);
  const double* av = val(node(a));
  const double* bv = val(node(b));
  double* y = val(node(id));
  for (int i = 0; i < node(id).len; ++i) y[i] = av[i] - bv[i];
  return id;
}

NodeId Tape::emul(NodeId a, NodeId b) {
  check_node(a);
  check_node(b);
  if (node(a).len != node(b).len) raise(Errc::dimension_mismatch, "emul: length mismatch");
  Node n;
  n.op = Op::kEMul;
  n.a = a;
  n.b = b;
  NodeId id = push(n, node(a).len);
  const double* av = val(node(a));
  const double* bv = val(node(b));
  double* y = val(node(id));
  for (int i = 0; i < node(id).len; ++i) y[i] = av[i] * bv[i];
  return id;
}

NodeId Tape::scale(NodeId x, double c) {
  check_node(x);
  Node n;
  n.op = Op::kScale;
  n.a = x;
  n.c0 = c;
  NodeId id = push(n, node(x).len);
  const double* xv = val(node(x));
  double* y = val(node(id));
  for (int i = 0; i < node(id).len; ++i) y[i] = c * xv[i];
  return id;
}

NodeId Tape::lincomb(std::span<const NodeId> xs, std::span<const double> coeffs) {
  if (xs.empty() || xs.size() != coeffs.size()) {
    raise(Errc::length_mismatch, "lincomb: inputs and coefficients must pair up");
  }
  const int len = length(xs[0]);
  for (NodeId x : xs) {
    if (length(x) != len) raise(Errc::dimension_mismatch, "lincomb: length mismatch");
  }
  Node n;
  n.op = Op::kLincomb;
  n.ext_off = static_cast<std::int32_t>(ext_ids_.size());
  n.ext_n = static_cast<std::int32_t>(xs.size());
  ext_ids_.insert(ext_ids_.end(), xs.begin(), xs.end());
  ext_coeffs_.insert(ext_coeffs_.end(), coeffs.begin(), coeffs.end());
  NodeId id = push(n, len);
  double* y = val(node(id));
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double* xv = val(node(xs[j]));
    const double c = coeffs[j];
    for (int i = 0; i < len; ++i) y[i] += c * xv[i];
  }
  return id;
}

NodeId Tape::index(NodeId x, int i) {
  check_node(x);
  if (i < 0 || i >= node(x).len) raise(Errc::out_of_domain, "index out of range");
  Node n;
  n.op = Op::kIndex;
  n.a = x;
  n.aux = i;
  NodeId id = push(n, 1);
  val(node(id))[0] = val(node(x))[i];
  return id;
}

NodeId Tape::concat(std::span<const NodeId> xs) {
  if (xs.empty()) raise(Errc::length_mismatch, "concat: needs at least one input");
  int total = 0;
  for (NodeId x : xs) total += length(x);
  Node n;
  n.op = Op::kConcat;
  n.ext_off = static_cast<std::int32_t>(ext_ids_.size());
  n.ext_n = static_cast<std::int32_t>(xs.size());
  ext_ids_.insert(ext_ids_.end(), xs.begin(), xs.end());
  ext_coeffs_.insert(ext_coeffs_.end(), xs.size(), 0.0);
  NodeId id = push(n, total);
  double* y = val(node(id));
  int pos = 0;
  for (NodeId x : xs) {
    const Node& xn = node(x);
    std::memcpy(y + pos, val(xn), static_cast<std::size_t>(xn.len) * sizeof(double));
    pos += xn.len;
  }
  return id;
}

NodeId Tape::sq_sum(NodeId x) {
  check_node(x);
  Node n;
  n.op = Op::kSqSum;
  n.a = x;
  NodeId id = push(n, 1);
  const double* xv = val(node(x));
  double acc = 0.0;
  for (int i = 0; i < node(x).len; ++i) acc += xv[i] * xv[i];
  val(node(id))[0] = acc;
  return id;
}

NodeId Tape::stop_gradient(NodeId x) {
  check_node(x);
  Node n;
  n.op = Op::kStopGrad;
  n.a = x;
  NodeId id = push(n, node(x).len);
  std::memcpy(val(node(id)), val(node(x)),
              static_cast<std::size_t>(node(x).len) * sizeof(double));
  return id;
}

int Tape::register_system(TridiagonalFactorization fac) {
  systems_.push_back(std::move(fac));
  return static_cast<int>(systems_.size()) - 1;
}

NodeId Tape::tridiag_solve(int system, NodeId rhs) {
  check_node(rhs);
  if (system < 0 || system >= static_cast<int>(systems_.size())) {
    raise(Errc::invariant_violation, "unknown tridiagonal system");
  }
  const TridiagonalFactorization& fac = systems_[static_cast<std::size_t>(system)];
  if (node(rhs).len != fac.size()) {
    raise(Errc::length_mismatch, "tridiag_solve: rhs length mismatch");
  }
  Node n;
  n.op = Op::kTridiag;
  n.a = rhs;
  n.aux = system;
  NodeId id = push(n, fac.size());
  fac.solve_into(value(rhs), std::span<double>(val_.data() + node(id).off,
                                               static_cast<std::size_t>(node(id).len)));
  return id;
}

void Tape::backward(NodeId seed, std::span<double> param_grad) {
  check_node(seed);
  if (node(seed).len != 1) raise(Errc::dimension_mismatch, "backward seed must be size-1");
  const bool want_params = params_ != nullptr && !param_grad.empty();
  if (want_params && static_cast<int>(param_grad.size()) != params_->size()) {
    raise(Errc::length_mismatch, "param_grad size mismatch");
  }
  grad_.assign(val_.size(), 0.0);
  grad_[static_cast<std::size_t>(node(seed).off)] = 1.0;

  std::vector<double> scratch;
  auto any_nonzero = [](const double* g, int len) {
    for (int i = 0; i < len; ++i) {
      if (g[i] != 0.0) return true;
    }
    return false;
  };

  // Nodes created after the seed cannot feed into it, so start the sweep there.
  for (NodeId id = seed; id >= 0; --id) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    const double* gy = grad_.data() + n.off;
    switch (n.op) {
      case Op::kConst:
      case Op::kStopGrad:
        break;
      case Op::kAffine:
      case Op::kLinear: {
        if (!any_nonzero(gy, n.len)) break;
        const TensorInfo& wi = params_->info(n.w);
        const double* W = pt(n.w).data();
        const Node& xn = node(n.a);
        double* gx = grad_.data() + xn.off;
        const double* xv = val(xn);
        for (int r = 0; r < wi.rows; ++r) {
          const double g = gy[r];
          if (g == 0.0) continue;
          const double* row = W + static_cast<std::size_t>(r) * wi.cols;
          for (int c = 0; c < wi.cols; ++c) gx[c] += row[c] * g;
        }
        if (want_params) {
          double* gW = param_grad.data() + wi.offset;
          for (int r = 0; r < wi.rows; ++r) {
            const double g = gy[r];
            if (g == 0.0) continue;
            double* grow = gW + static_cast<std::size_t>(r) * wi.cols;
            for (int c = 0; c < wi.cols; ++c) grow[c] += g * xv[c];
          }
          if (n.op == Op::kAffine) {
            double* gb = param_grad.data() + params_->info(n.bias).offset;
            for (int r = 0; r < wi.rows; ++r) gb[r] += gy[r];
          }
        }
        break;
      }
      case Op::kAffine2: {
        if (!any_nonzero(gy, n.len)) break;
        const TensorInfo& wi = params_->info(n.w);
        const TensorInfo& ui = params_->info(n.u);
        const double* W = pt(n.w).data();
        const double* U = pt(n.u).data();
        const Node& an = node(n.a);
        const Node& bn = node(n.b);
        double* ga = grad_.data() + an.off;
        double* gb2 = grad_.data() + bn.off;
        const double* av = val(an);
        const double* bv = val(bn);
        for (int r = 0; r < wi.rows; ++r) {
          const double g = gy[r];
          if (g == 0.0) continue;
          const double* wrow = W + static_cast<std::size_t>(r) * wi.cols;
          for (int c = 0; c < wi.cols; ++c) ga[c] += wrow[c] * g;
          const double* urow = U + static_cast<std::size_t>(r) * ui.cols;
          for (int c = 0; c < ui.cols; ++c) gb2[c] += urow[c] * g;
        }
        if (want_params) {
          double* gW = param_grad.data() + wi.offset;
          double* gU = param_grad.data() + ui.offset;
          double* gbias = param_grad.data() + params_->info(n.bias).offset;
          for (int r = 0; r < wi.rows; ++r) {
            const double g = gy[r];
            if (g == 0.0) continue;
            double* grow = gW + static_cast<std::size_t>(r) * wi.cols;
            for (int c = 0; c < wi.cols; ++c) grow[c] += g * av[c];
            double* gurow = gU + static_cast<std::size_t>(r) * ui.cols;
            for (int c = 0; c < ui.cols; ++c) gurow[c] += g * bv[c];
            gbias[r] += g;
          }
        }
        break;
      }
      case Op::kLinearT: {
        if (!any_nonzero(gy, n.len)) break;
        const TensorInfo& wi = params_->info(n.w);
        const double* W = pt(n.w).data();
        const Node& xn = node(n.a);
        double* gx = grad_.data() + xn.off;
        const double* xv = val(xn);
        // y = W^T x  =>  gx += W gy, gW += x gy^T
        for (int r = 0; r < wi.rows; ++r) {
          const double* row = W + static_cast<std::size_t>(r) * wi.cols;
          double acc = 0.0;
          for (int c = 0; c < wi.cols; ++c) acc += row[c] * gy[c];
          gx[r] += acc;
        }
        if (want_params) {
          double* gW = param_grad.data() + wi.offset;
          for (int r = 0; r < wi.rows; ++r) {
            const double xr = xv[r];
            if (xr == 0.0) continue;
            double* grow = gW + static_cast<std::size_t>(r) * wi.cols;
            for (int c = 0; c < wi.cols; ++c) grow[c] += xr * gy[c];
          }
        }
        break;
      }
      case Op::kTanh: {
        const Node& xn = node(n.a);
        double* gx = grad_.data() + xn.off;
        const double* y = val(n);
        for (int i = 0; i < n.len; ++i) gx[i] += (1.0 - y[i] * y[i]) * gy[i];
        break;
      }
      case Op::kSigmoid: {
        const Node& xn = node(n.a);
        double* gx = grad_.data() + xn.off;
        const double* y = val(n);
        for (int i = 0; i < n.len; ++i) gx[i] += y[i] * (1.0 - y[i]) * gy[i];
        break;
      }
      case Op::kOneMinusSq: {
        const Node& xn = node(n.a);
        double* gx = grad_.data() + xn.off;
        const double* xv = val(xn);
        for (int i = 0; i < n.len; ++i) gx[i] += -2.0 * xv[i] * gy[i];
        break;
      }
      case Op::kAdd: {
        double* ga = grad_.data() + node(n.a).off;
        double* gb = grad_.data() + node(n.b).off;
        for (int i = 0; i < n.len; ++i) {
          ga[i] += gy[i];
          gb[i] += gy[i];
        }
        break;
      }
      case Op::kSub: {
        double* ga = grad_.data() + node(n.a).off;
        double* gb = grad_.data() + node(n.b).off;
        for (int i = 0; i < n.len; ++i) {
          ga[i] += gy[i];
          gb[i] -= gy[i];
        }
        break;
      }
      case Op::kEMul: {
        double* ga = grad_.data() + node(n.a).off;
        double* gb = grad_.data() + node(n.b).off;
        const double* av = val(node(n.a));
        const double* bv = val(node(n.b));
        for (int i = 0; i < n.len; ++i) {
          ga[i] += bv[i] * gy[i];
          gb[i] += av[i] * gy[i];
        }
        break;
      }
      case Op::kScale: {
        double* gx = grad_.data() + node(n.a).off;
        for (int i = 0; i < n.len; ++i) gx[i] += n.c0 * gy[i];
        break;
      }
      case Op::kLincomb: {
        for (int j = 0; j < n.ext_n; ++j) {
          const NodeId xid = ext_ids_[static_cast<std::size_t>(n.ext_off) + j];
          const double c = ext_coeffs_[static_cast<std::size_t>(n.ext_off) + j];
          double* gx = grad_.data() + node(xid).off;
          for (int i = 0; i < n.len; ++i) gx[i] += c * gy[i];
        }
        break;
      }
      case Op::kIndex: {
        double* gx = grad_.data() + node(n.a).off;
        gx[n.aux] += gy[0];
        break;
      }
      case Op::kConcat: {
        int pos = 0;
        for (int j = 0; j < n.ext_n; ++j) {
          const NodeId xid = ext_ids_[static_cast<std::size_t>(n.ext_off) + j];
          const Node& xn = node(xid);
          double* gx = grad_.data() + xn.off;
          for (int i = 0; i < xn.len; ++i) gx[i] += gy[pos + i];
          pos += xn.len;
        }
        break;
      }
      case Op::kSqSum: {
        const Node& xn = node(n.a);
        double* gx = grad_.data() + xn.off;
        const double* xv = val(xn);
        const double g = gy[0];
        if (g != 0.0) {
          for (int i = 0; i < xn.len; ++i) gx[i] += 2.0 * xv[i] * g;
        }
        break;
      }
      case Op::kTridiag: {
        if (!any_nonzero(gy, n.len)) break;
        const TridiagonalFactorization& fac = systems_[static_cast<std::size_t>(n.aux)];
        scratch.resize(static_cast<std::size_t>(n.len));
        fac.solve_transposed_into(std::span<const double>(gy, static_cast<std::size_t>(n.len)),
                                  scratch);
        double* gx = grad_.data() + node(n.a).off;
        for (int i = 0; i < n.len; ++i) gx[i] += scratch[i];
        break;
      }
    }
  }
}

void Tape::reset() {
  nodes_.clear();
  val_.clear();
  grad_.clear();
  ext_ids_.clear();
  ext_coeffs_.clear();
  systems_.clear();
}

}  // namespace cssc::ad
