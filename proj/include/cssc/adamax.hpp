#pragma once

#include <span>
#include <vector>

namespace cssc {

struct AdaMaxConfig {
  double learning_rate = 0.02;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam variant with an infinity-norm second moment: u is the running max of
/// beta2 * u and |g|, so the effective step never divides by a stale small
/// denominator. Only the first moment gets bias correction.
class AdaMax {
 public:
  explicit AdaMax(int size, AdaMaxConfig cfg = {});

  void step(std::span<double> params, std::span<const double> grad);
  void reset();
  long long step_count() const { return t_; }
  std::span<const double> infinity_moment() const { return u_; }

 private:
  AdaMaxConfig cfg_;
  std::vector<double> m_, u_;
  long long t_ = 0;
};

}  // namespace cssc
