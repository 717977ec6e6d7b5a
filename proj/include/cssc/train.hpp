#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cssc/odernn.hpp"

namespace cssc {

/// Per-trajectory loss nodes: mean squared readout error over the requested
/// times, mean squared compensation magnitude, and their weighted sum
/// total = mse + alpha * penalty.
struct LossNodes {
  ad::NodeId mse = ad::kNoNode;
  ad::NodeId penalty = ad::kNoNode;
  ad::NodeId total = ad::kNoNode;
};

/// Builds the supervised loss for one trajectory on the tape, querying every
/// grid point (observed or not). Gradients flow through the integration, the
/// cell updates, the derivative extraction and the moment solve.
LossNodes trajectory_loss(ad::Tape& t, const OdeRnnModel& model, const Trajectory& traj,
                          CompensationSpace space);

struct DatasetSplit {
  std::vector<int> train, val, test;
};

/// Deterministic shuffle-then-cut split by trajectory index. The same seed
/// and fractions always produce the same split, so training and later
/// evaluation agree on which trajectories are held out.
DatasetSplit split_dataset(int count, double train_fraction, double val_fraction,
                           std::uint64_t seed);

struct TrainOptions {
  int epochs = 300;
  int patience = 20;          // early-stopping window on validation error
  int threads = 1;            // trajectory-level parallelism, deterministic
  std::string metrics_path;   // per-epoch CSV when non-empty
};

struct TrainResult {
  std::vector<double> train_mse, train_penalty, val_mse;  // per epoch
  int best_epoch = -1;        // epoch whose parameters the model now holds
  double best_val_mse = 0.0;
  int epochs_run = 0;
};

/// Full-batch training with the infinity-norm optimizer and early stopping.
/// The model keeps the parameters of its best validation epoch. Throws
/// Errc::non_finite_loss if the loss leaves the finite range.
TrainResult train(OdeRnnModel& model, const std::vector<Trajectory>& data,
                  const DatasetSplit& split, const TrainOptions& opts);

enum class EvalMode { cssc, hidden, odernn, posthoc, prehoc, spline_baseline };

const char* to_string(EvalMode m);
EvalMode eval_mode_from_string(const std::string& s);

/// The compensation space an evaluation mode forces, regardless of how the
/// model was trained: cssc and posthoc read out compensated in output space,
/// odernn and prehoc read the raw right-continuous output, hidden
/// compensates the state before decoding.
CompensationSpace eval_space(EvalMode m);

struct EvalResult {
  double mse = 0.0;          // pooled per-element mean over all grid points
  long long points = 0;      // grid points evaluated
  int trajectories = 0;
};

/// Model-based evaluation over the listed trajectories at every grid point.
EvalResult evaluate(const OdeRnnModel& model, const std::vector<Trajectory>& data,
                    std::span<const int> indices, EvalMode mode);

/// Model-free baseline: a natural cubic spline through each trajectory's
/// observed points, evaluated at every grid point.
EvalResult evaluate_spline_baseline(const std::vector<Trajectory>& data,
                                    std::span<const int> indices);

}  // namespace cssc
