#pragma once

#include <span>
#include <string>
#include <vector>

#include "cssc/params.hpp"
#include "cssc/tape.hpp"

namespace cssc {

/// Fully connected net: tanh on every hidden layer, affine final layer.
/// Construction registers the tensors; the store owns the numbers, so one
/// Mlp can be evaluated against any parameter vector of matching shape.
class Mlp {
 public:
  Mlp() = default;
  /// dims = {in, hidden..., out}; needs at least {in, out}.
  Mlp(ParamStore& store, const std::string& prefix, std::vector<int> dims);

  int in_dim() const { return dims_.empty() ? 0 : dims_.front(); }
  int out_dim() const { return dims_.empty() ? 0 : dims_.back(); }
  int layer_count() const { return static_cast<int>(w_.size()); }

  /// Xavier-uniform weights, zero biases.
  void init(ParamStore& store, Rng& rng) const;

  /// Untaped evaluation. `buf` is scratch, resized as needed.
  void eval(const ParamStore& store, std::span<const double> x, std::span<double> out,
            std::vector<double>& buf) const;
  std::vector<double> eval(const ParamStore& store, std::span<const double> x) const;

  struct Activations {
    std::vector<ad::NodeId> hidden;  // post-tanh node per hidden layer
    ad::NodeId out = ad::kNoNode;
  };

  ad::NodeId forward(ad::Tape& t, ad::NodeId x) const;
  Activations forward_full(ad::Tape& t, ad::NodeId x) const;

  /// Directional derivative dF(x)[v], built from taped primitives so the
  /// result can itself be differentiated. `acts` must come from forward_full
  /// of this net on the same tape.
  ad::NodeId jvp(ad::Tape& t, const Activations& acts, ad::NodeId v) const;
  /// Transposed product J(x)^T w under the same contract.
  ad::NodeId vjp(ad::Tape& t, const Activations& acts, ad::NodeId w) const;

 private:
  std::vector<int> dims_;
  std::vector<int> w_;
  std::vector<int> b_;
};

/// Gated update used at observation times: h' = h + z (cand - h), with
/// update gate z, reset gate r, and candidate tanh state. An optional input
/// embedding (embed_dim > 0) passes x through its own tanh layer first.
class GruCell {
 public:
  GruCell() = default;
  GruCell(ParamStore& store, const std::string& prefix, int hidden_dim, int input_dim,
          int embed_dim);

  int hidden_dim() const { return hidden_dim_; }
  int input_dim() const { return input_dim_; }

  void init(ParamStore& store, Rng& rng) const;

  ad::NodeId update(ad::Tape& t, ad::NodeId h, ad::NodeId x) const;
  std::vector<double> update(const ParamStore& store, std::span<const double> h,
                             std::span<const double> x) const;

 private:
  int hidden_dim_ = 0, input_dim_ = 0, embed_dim_ = 0;
  int we_ = -1, be_ = -1;
  int wz_ = -1, uz_ = -1, bz_ = -1;
  int wr_ = -1, ur_ = -1, br_ = -1;
  int wh_ = -1, uh_ = -1, bh_ = -1;
};

}  // namespace cssc
