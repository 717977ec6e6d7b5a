#include "cssc/params.hpp"

#include <cmath>

#include "cssc/errors.hpp"

namespace cssc {

int ParamStore::add(std::string name, int rows, int cols) {
  if (rows < 1 || cols < 1) raise(Errc::invalid_spec, "tensor dims must be >= 1");
  TensorInfo info;
  info.name = std::move(name);
  info.rows = rows;
  info.cols = cols;
  info.offset = size();
  infos_.push_back(info);
  values_.resize(values_.size() + static_cast<std::size_t>(rows) * cols, 0.0);
  return tensor_count() - 1;
}

std::span<double> ParamStore::tensor(int id) {
  const TensorInfo& t = info(id);
  return std::span<double>(values_).subspan(static_cast<std::size_t>(t.offset),
                                            static_cast<std::size_t>(t.rows) * t.cols);
}

std::span<const double> ParamStore::tensor(int id) const {
  const TensorInfo& t = info(id);
  return std::span<const double>(values_).subspan(
      static_cast<std::size_t>(t.offset), static_cast<std::size_t>(t.rows) * t.cols);
}

void ParamStore::init_xavier(int id, Rng& rng) {
  const TensorInfo& t = info(id);
  const double bound = std::sqrt(6.0 / (t.rows + t.cols));
  for (double& v : tensor(id)) v = rng.uniform(-bound, bound);
}

void ParamStore::fill(int id, double v) {
  for (double& x : tensor(id)) x = v;
}

}  // namespace cssc
