#pragma once

#include <string>

#include "cssc/core.hpp"
#include "cssc/params.hpp"

namespace cssc {

/// A checkpoint is two files: JSON metadata at `path` (config, data dim,
/// tensor shapes in declaration order) and the raw parameter values at
/// `path + ".bin"` as little-endian float64 in that same order.
struct CheckpointHeader {
  RunConfig config;
  int data_dim = 0;
};

void save_checkpoint(const std::string& path, const RunConfig& config, int data_dim,
                     const ParamStore& store);

/// Reads just the metadata, so the caller can rebuild the model before
/// loading values.
CheckpointHeader read_checkpoint_header(const std::string& path);

/// Copies the blob into `store`. Throws Errc::checkpoint_mismatch when the
/// recorded tensor list does not match the store's declarations exactly.
void load_checkpoint_params(const std::string& path, ParamStore& store);

}  // namespace cssc
