#pragma once

#include <span>
#include <string>
#include <vector>

#include "cssc/rng.hpp"

namespace cssc {

/// One named parameter tensor, row-major, living inside a flat buffer.
struct TensorInfo {
  std::string name;
  int rows = 0;
  int cols = 0;  // 1 for vectors
  int offset = 0;
};

/// Flat parameter buffer with named tensor views. Declaration order fixes
/// both the checkpoint blob layout and the optimizer's view of the world.
class ParamStore {
 public:
  int add(std::string name, int rows, int cols);

  int tensor_count() const { return static_cast<int>(infos_.size()); }
  int size() const { return static_cast<int>(values_.size()); }

  const TensorInfo& info(int id) const { return infos_[static_cast<std::size_t>(id)]; }
  const std::vector<TensorInfo>& tensors() const { return infos_; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> tensor(int id);
  std::span<const double> tensor(int id) const;

  /// Xavier-uniform fill: bound sqrt(6 / (rows + cols)).
  void init_xavier(int id, Rng& rng);
  void fill(int id, double v);

 private:
  std::vector<TensorInfo> infos_;
  std::vector<double> values_;
};

}  // namespace cssc
