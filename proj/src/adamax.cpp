#include "cssc/adamax.hpp"

#include <cmath>

#include "cssc/errors.hpp"

namespace cssc {

AdaMax::AdaMax(int size, AdaMaxConfig cfg) : cfg_(cfg) {
  if (size < 0) raise(Errc::invalid_spec, "optimizer size must be nonnegative");
  if (cfg_.learning_rate <= 0.0 || cfg_.beta1 < 0.0 || cfg_.beta1 >= 1.0 || cfg_.beta2 < 0.0 ||
      cfg_.beta2 > 1.0) {
    raise(Errc::invalid_spec, "optimizer hyperparameters out of range");
  }
  m_.assign(static_cast<std::size_t>(size), 0.0);
  u_.assign(static_cast<std::size_t>(size), 0.0);
}

void AdaMax::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    raise(Errc::length_mismatch, "optimizer step: size mismatch");
  }
  t_ += 1;
  const double correction = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double lr = cfg_.learning_rate / correction;
  for (std::size_t i = 0; i < m_.size(); ++i) {
    const double g = grad[i];
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    u_[i] = std::max(cfg_.beta2 * u_[i], std::abs(g));
    params[i] -= lr * m_[i] / (u_[i] + cfg_.eps);
  }
}

void AdaMax::reset() {
  std::fill(m_.begin(), m_.end(), 0.0);
  std::fill(u_.begin(), u_.end(), 0.0);
  t_ = 0;
}

}  // namespace cssc
