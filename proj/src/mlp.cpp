#include "cssc/mlp.hpp"

#include <cmath>

#include "cssc/errors.hpp"

namespace cssc {
namespace {

// y = W x + b with W row-major rows x cols.
void affine_eval(const ParamStore& store, int w, int b, std::span<const double> x,
                 std::span<double> y) {
  const TensorInfo& wi = store.info(w);
  std::span<const double> W = store.tensor(w);
  std::span<const double> bv = store.tensor(b);
  for (int r = 0; r < wi.rows; ++r) {
    double acc = bv[static_cast<std::size_t>(r)];
    const double* row = W.data() + static_cast<std::size_t>(r) * wi.cols;
    for (int c = 0; c < wi.cols; ++c) acc += row[c] * x[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = acc;
  }
}

}  // namespace

Mlp::Mlp(ParamStore& store, const std::string& prefix, std::vector<int> dims)
    : dims_(std::move(dims)) {
  if (dims_.size() < 2) raise(Errc::invalid_spec, "mlp needs at least {in, out} dims");
  for (int d : dims_) {
    if (d < 1) raise(Errc::invalid_spec, "mlp layer width must be positive");
  }
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    w_.push_back(store.add(prefix + ".w" + std::to_string(l), dims_[l + 1], dims_[l]));
    b_.push_back(store.add(prefix + ".b" + std::to_string(l), dims_[l + 1], 1));
  }
}

void Mlp::init(ParamStore& store, Rng& rng) const {
  for (std::size_t l = 0; l < w_.size(); ++l) {
    store.init_xavier(w_[l], rng);
    store.fill(b_[l], 0.0);
  }
}

void Mlp::eval(const ParamStore& store, std::span<const double> x, std::span<double> out,
               std::vector<double>& buf) const {
  if (static_cast<int>(x.size()) != in_dim() || static_cast<int>(out.size()) != out_dim()) {
    raise(Errc::dimension_mismatch, "mlp eval: bad input or output size");
  }
  int maxw = 0;
  for (int d : dims_) maxw = std::max(maxw, d);
  buf.resize(2 * static_cast<std::size_t>(maxw));
  std::span<double> cur(buf.data(), static_cast<std::size_t>(maxw));
  std::span<double> nxt(buf.data() + maxw, static_cast<std::size_t>(maxw));
  std::copy(x.begin(), x.end(), cur.begin());
  const int layers = layer_count();
  for (int l = 0; l < layers; ++l) {
    std::span<double> dst = (l + 1 == layers) ? out : nxt;
    affine_eval(store, w_[static_cast<std::size_t>(l)], b_[static_cast<std::size_t>(l)],
                cur.subspan(0, static_cast<std::size_t>(dims_[static_cast<std::size_t>(l)])),
                dst.subspan(0, static_cast<std::size_t>(dims_[static_cast<std::size_t>(l) + 1])));
    if (l + 1 != layers) {
      for (int i = 0; i < dims_[static_cast<std::size_t>(l) + 1]; ++i) {
        nxt[static_cast<std::size_t>(i)] = std::tanh(nxt[static_cast<std::size_t>(i)]);
      }
      std::swap(cur, nxt);
    }
  }
}

std::vector<double> Mlp::eval(const ParamStore& store, std::span<const double> x) const {
  std::vector<double> out(static_cast<std::size_t>(out_dim()));
  std::vector<double> buf;
  eval(store, x, out, buf);
  return out;
}

ad::NodeId Mlp::forward(ad::Tape& t, ad::NodeId x) const {
  return forward_full(t, x).out;
}

Mlp::Activations Mlp::forward_full(ad::Tape& t, ad::NodeId x) const {
  Activations acts;
  ad::NodeId cur = x;
  const int layers = layer_count();
  for (int l = 0; l < layers; ++l) {
    cur = t.affine(w_[static_cast<std::size_t>(l)], b_[static_cast<std::size_t>(l)], cur);
    if (l + 1 != layers) {
      cur = t.tanh(cur);
      acts.hidden.push_back(cur);
    }
  }
  acts.out = cur;
  return acts;
}

ad::NodeId Mlp::jvp(ad::Tape& t, const Activations& acts, ad::NodeId v) const {
  if (acts.hidden.size() + 1 != w_.size()) {
    raise(Errc::invariant_violation, "jvp: activations do not match this net");
  }
  ad::NodeId u = v;
  for (std::size_t l = 0; l + 1 < w_.size(); ++l) {
    u = t.emul(t.one_minus_sq(acts.hidden[l]), t.linear(w_[l], u));
  }
  return t.linear(w_.back(), u);
}

ad::NodeId Mlp::vjp(ad::Tape& t, const Activations& acts, ad::NodeId w) const {
  if (acts.hidden.size() + 1 != w_.size()) {
    raise(Errc::invariant_violation, "vjp: activations do not match this net");
  }
  ad::NodeId p = t.linear_t(w_.back(), w);
  for (std::size_t l = w_.size() - 1; l-- > 0;) {
    p = t.linear_t(w_[l], t.emul(t.one_minus_sq(acts.hidden[l]), p));
  }
  return p;
}

GruCell::GruCell(ParamStore& store, const std::string& prefix, int hidden_dim, int input_dim,
                 int embed_dim)
    : hidden_dim_(hidden_dim), input_dim_(input_dim), embed_dim_(embed_dim) {
  if (hidden_dim < 1 || input_dim < 1 || embed_dim < 0) {
    raise(Errc::invalid_spec, "gru cell dims must be positive (embed may be 0)");
  }
  const int in = embed_dim_ > 0 ? embed_dim_ : input_dim_;
  if (embed_dim_ > 0) {
    we_ = store.add(prefix + ".we", embed_dim_, input_dim_);
    be_ = store.add(prefix + ".be", embed_dim_, 1);
  }
  wz_ = store.add(prefix + ".wz", hidden_dim_, in);
  uz_ = store.add(prefix + ".uz", hidden_dim_, hidden_dim_);
  bz_ = store.add(prefix + ".bz", hidden_dim_, 1);
  wr_ = store.add(prefix + ".wr", hidden_dim_, in);
  ur_ = store.add(prefix + ".ur", hidden_dim_, hidden_dim_);
  br_ = store.add(prefix + ".br", hidden_dim_, 1);
  wh_ = store.add(prefix + ".wh", hidden_dim_, in);
  uh_ = store.add(prefix + ".uh", hidden_dim_, hidden_dim_);
  bh_ = store.add(prefix + ".bh", hidden_dim_, 1);
}

void GruCell::init(ParamStore& store, Rng& rng) const {
  if (we_ >= 0) {
    store.init_xavier(we_, rng);
    store.fill(be_, 0.0);
  }
  for (int w : {wz_, uz_, wr_, ur_, wh_, uh_}) store.init_xavier(w, rng);
  for (int b : {bz_, br_, bh_}) store.fill(b, 0.0);
}

ad::NodeId GruCell::update(ad::Tape& t, ad::NodeId h, ad::NodeId x) const {
  ad::NodeId e = x;
  if (we_ >= 0) e = t.tanh(t.affine(we_, be_, x));
  ad::NodeId z = t.sigmoid(t.affine2(wz_, e, uz_, h, bz_));
  ad::NodeId r = t.sigmoid(t.affine2(wr_, e, ur_, h, br_));
  ad::NodeId cand = t.tanh(t.affine2(wh_, e, uh_, t.emul(r, h), bh_));
  return t.add(h, t.emul(z, t.sub(cand, h)));
}

std::vector<double> GruCell::update(const ParamStore& store, std::span<const double> h,
                                    std::span<const double> x) const {
  if (static_cast<int>(h.size()) != hidden_dim_ || static_cast<int>(x.size()) != input_dim_) {
    raise(Errc::dimension_mismatch, "gru update: bad state or input size");
  }
  const std::size_t n = static_cast<std::size_t>(hidden_dim_);
  std::vector<double> e;
  std::span<const double> in = x;
  if (we_ >= 0) {
    e.resize(static_cast<std::size_t>(embed_dim_));
    affine_eval(store, we_, be_, x, e);
    for (double& v : e) v = std::tanh(v);
    in = e;
  }
  std::vector<double> z(n), r(n), cand(n), rh(n);
  // out = W in + U hin + b
  auto gate = [&](int w, int u, int b, std::span<const double> hin, std::span<double> out) {
    const TensorInfo& wi = store.info(w);
    const TensorInfo& ui = store.info(u);
    std::span<const double> W = store.tensor(w);
    std::span<const double> U = store.tensor(u);
    std::span<const double> bv = store.tensor(b);
    for (int row = 0; row < wi.rows; ++row) {
      double acc = bv[static_cast<std::size_t>(row)];
      const double* wr = W.data() + static_cast<std::size_t>(row) * wi.cols;
      for (int c = 0; c < wi.cols; ++c) acc += wr[c] * in[static_cast<std::size_t>(c)];
      const double* ur = U.data() + static_cast<std::size_t>(row) * ui.cols;
      for (int c = 0; c < ui.cols; ++c) acc += ur[c] * hin[static_cast<std::size_t>(c)];
      out[static_cast<std::size_t>(row)] = acc;
    }
  };
  gate(wz_, uz_, bz_, h, z);
  gate(wr_, ur_, br_, h, r);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = 1.0 / (1.0 + std::exp(-z[i]));
    r[i] = 1.0 / (1.0 + std::exp(-r[i]));
    rh[i] = r[i] * h[i];
  }
  gate(wh_, uh_, bh_, rh, cand);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::tanh(cand[i]);
    out[i] = h[i] + z[i] * (c - h[i]);
  }
  return out;
}

}  // namespace cssc
