#include "cssc/train.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <numeric>

#include "cssc/adamax.hpp"
#include "cssc/errors.hpp"
#include "cssc/rng.hpp"

namespace cssc {

LossNodes trajectory_loss(ad::Tape& t, const OdeRnnModel& model, const Trajectory& traj,
                          CompensationSpace space) {
  const OdeRnnModel::Pass pass = model.forward(t, traj, traj.grid.points, space);
  const OdeRnnModel::Compensated comp = model.compensate(t, pass);

  const std::size_t nq = pass.times.size();
  std::vector<ad::NodeId> se(nq), pe;
  pe.reserve(nq);
  for (std::size_t i = 0; i < nq; ++i) {
    const ad::NodeId target = t.constant(traj.values[i]);
    se[i] = t.sq_sum(t.sub(target, comp.o_hat[i]));
    if (comp.comp[i] != ad::kNoNode) pe.push_back(t.sq_sum(comp.comp[i]));
  }

  LossNodes out;
  const std::vector<double> w(nq, 1.0 / static_cast<double>(nq));
  out.mse = t.lincomb(se, w);
  if (pe.empty()) {
    out.penalty = t.constant(0.0);
    out.total = out.mse;
  } else {
    out.penalty = t.lincomb(pe, std::vector<double>(pe.size(), 1.0 / static_cast<double>(nq)));
    const std::array<ad::NodeId, 2> parts{out.mse, out.penalty};
    const std::array<double, 2> coeffs{1.0, model.config().alpha};
    out.total = t.lincomb(parts, coeffs);
  }
  return out;
}

DatasetSplit split_dataset(int count, double train_fraction, double val_fraction,
                           std::uint64_t seed) {
  if (count < 1) raise(Errc::invalid_spec, "dataset is empty");
  if (train_fraction < 0.0 || val_fraction < 0.0 || train_fraction + val_fraction > 1.0) {
    raise(Errc::invalid_spec, "split fractions must be nonnegative and sum to at most 1");
  }
  std::vector<int> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int i = count - 1; i > 0; --i) {
    const int j = rng.uniform_int(0, i);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  const int n_train = static_cast<int>(std::floor(train_fraction * count));
  const int n_val = static_cast<int>(std::floor(val_fraction * count));
  DatasetSplit split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  split.test.assign(order.begin() + n_train + n_val, order.end());
  return split;
}

namespace {

struct BatchStats {
  double mse = 0.0, penalty = 0.0;
  std::vector<double> grad;
};

// Loss + gradient over a contiguous index range, accumulated in index order.
BatchStats run_chunk(const OdeRnnModel& model, const std::vector<Trajectory>& data,
                     std::span<const int> indices, CompensationSpace space) {
  BatchStats stats;
  stats.grad.assign(static_cast<std::size_t>(model.params().size()), 0.0);
  ad::Tape tape(&model.params());
  for (int idx : indices) {
    tape.reset();
    const LossNodes loss =
        trajectory_loss(tape, model, data[static_cast<std::size_t>(idx)], space);
    stats.mse += tape.scalar(loss.mse);
    stats.penalty += tape.scalar(loss.penalty);
    tape.backward(loss.total, stats.grad);
  }
  return stats;
}

double validation_mse(const OdeRnnModel& model, const std::vector<Trajectory>& data,
                      std::span<const int> indices, CompensationSpace space) {
  if (indices.empty()) return 0.0;
  double sum = 0.0;
  ad::Tape tape(&model.params());
  for (int idx : indices) {
    tape.reset();
    const LossNodes loss =
        trajectory_loss(tape, model, data[static_cast<std::size_t>(idx)], space);
    sum += tape.scalar(loss.mse);
  }
  return sum / static_cast<double>(indices.size());
}

}  // namespace

TrainResult train(OdeRnnModel& model, const std::vector<Trajectory>& data,
                  const DatasetSplit& split, const TrainOptions& opts) {
  if (split.train.empty()) raise(Errc::invalid_spec, "training split is empty");
  if (opts.epochs < 1) raise(Errc::invalid_spec, "epoch count must be positive");
  const CompensationSpace space = model.config().compensation_space;
  const int threads = std::max(1, opts.threads);
  const int batch = static_cast<int>(split.train.size());

  AdaMaxConfig ocfg;
  ocfg.learning_rate = model.config().learning_rate;
  ocfg.beta1 = model.config().beta1;
  ocfg.beta2 = model.config().beta2;
  AdaMax opt(model.params().size(), ocfg);

  std::ofstream metrics;
  if (!opts.metrics_path.empty()) {
    metrics.open(opts.metrics_path);
    if (!metrics) raise(Errc::parse_error, "cannot write " + opts.metrics_path);
    metrics << std::setprecision(17);
    metrics << "epoch,train_mse,train_penalty,val_mse,mode\n";
  }

  TrainResult result;
  std::vector<double> grad(static_cast<std::size_t>(model.params().size()));
  std::vector<double> best_params;
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = -1;

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double mse_sum = 0.0, pen_sum = 0.0;

    if (threads == 1 || batch == 1) {
      const BatchStats stats = run_chunk(model, data, split.train, space);
      mse_sum = stats.mse;
      pen_sum = stats.penalty;
      std::copy(stats.grad.begin(), stats.grad.end(), grad.begin());
    } else {
      // Contiguous chunks reduced in chunk order make every run with the
      // same thread count bit-identical; changing the count regroups the
      // gradient sums and may differ in the last bits.
      const int n_chunks = std::min(threads, batch);
      std::vector<std::future<BatchStats>> futures;
      futures.reserve(static_cast<std::size_t>(n_chunks));
      for (int c = 0; c < n_chunks; ++c) {
        const int lo = batch * c / n_chunks;
        const int hi = batch * (c + 1) / n_chunks;
        futures.push_back(std::async(std::launch::async, [&, lo, hi] {
          return run_chunk(model, data,
                           std::span<const int>(split.train.data() + lo,
                                                static_cast<std::size_t>(hi - lo)),
                           space);
        }));
      }
      for (auto& fut : futures) {
        const BatchStats stats = fut.get();
        mse_sum += stats.mse;
        pen_sum += stats.penalty;
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += stats.grad[i];
      }
    }

    const double inv_b = 1.0 / static_cast<double>(batch);
    const double train_mse = mse_sum * inv_b;
    const double train_penalty = pen_sum * inv_b;
    if (!std::isfinite(train_mse) || !std::isfinite(train_penalty)) {
      raise(Errc::non_finite_loss, "training loss left the finite range");
    }
    for (double& g : grad) g *= inv_b;

    opt.step(model.params().values(), grad);

    // With no held-out trajectories the training error stands in, so the
    // tracked metric and the CSV column stay meaningful.
    const double val = split.val.empty() ? train_mse
                                         : validation_mse(model, data, split.val, space);
    if (!std::isfinite(val)) raise(Errc::non_finite_loss, "validation loss left the finite range");

    result.train_mse.push_back(train_mse);
    result.train_penalty.push_back(train_penalty);
    result.val_mse.push_back(val);
    result.epochs_run = epoch + 1;
    if (metrics.is_open()) {
      metrics << epoch << ',' << train_mse << ',' << train_penalty << ',' << val << ','
              << to_string(space) << '\n';
    }

    if (val < best_val) {
      best_val = val;
      best_epoch = epoch;
      const std::span<const double> cur = model.params().values();
      best_params.assign(cur.begin(), cur.end());
    } else if (epoch - best_epoch >= opts.patience) {
      break;
    }
  }

  if (!best_params.empty()) {
    std::copy(best_params.begin(), best_params.end(), model.params().values().begin());
  }
  result.best_epoch = best_epoch;
  result.best_val_mse = best_val;
  return result;
}

const char* to_string(EvalMode m) {
  switch (m) {
    case EvalMode::cssc: return "cssc";
    case EvalMode::hidden: return "hidden";
    case EvalMode::odernn: return "odernn";
    case EvalMode::posthoc: return "posthoc";
    case EvalMode::prehoc: return "prehoc";
    case EvalMode::spline_baseline: return "spline_baseline";
  }
  return "?";
}

EvalMode eval_mode_from_string(const std::string& s) {
  if (s == "cssc") return EvalMode::cssc;
  if (s == "hidden") return EvalMode::hidden;
  if (s == "odernn") return EvalMode::odernn;
  if (s == "posthoc") return EvalMode::posthoc;
  if (s == "prehoc") return EvalMode::prehoc;
  if (s == "spline_baseline") return EvalMode::spline_baseline;
  raise(Errc::invalid_spec, "unknown evaluation mode: " + s);
}

CompensationSpace eval_space(EvalMode m) {
  switch (m) {
    case EvalMode::cssc:
    case EvalMode::posthoc:
      return CompensationSpace::output;
    case EvalMode::hidden:
      return CompensationSpace::hidden;
    case EvalMode::odernn:
    case EvalMode::prehoc:
      return CompensationSpace::none;
    case EvalMode::spline_baseline:
      break;
  }
  raise(Errc::invalid_spec, "spline baseline does not use the model");
}

EvalResult evaluate(const OdeRnnModel& model, const std::vector<Trajectory>& data,
                    std::span<const int> indices, EvalMode mode) {
  const CompensationSpace space = eval_space(mode);
  EvalResult out;
  double se = 0.0;
  long long elements = 0;
  ad::Tape tape(&model.params());
  for (int idx : indices) {
    const Trajectory& traj = data[static_cast<std::size_t>(idx)];
    tape.reset();
    const OdeRnnModel::Pass pass = model.forward(tape, traj, traj.grid.points, space);
    const OdeRnnModel::Compensated comp = model.compensate(tape, pass);
    for (std::size_t i = 0; i < traj.values.size(); ++i) {
      const std::span<const double> got = tape.value(comp.o_hat[i]);
      for (int d = 0; d < traj.dim; ++d) {
        const double diff = traj.values[i][static_cast<std::size_t>(d)] -
                            got[static_cast<std::size_t>(d)];
        se += diff * diff;
      }
      elements += traj.dim;
    }
    out.points += static_cast<long long>(traj.values.size());
    out.trajectories += 1;
  }
  out.mse = elements > 0 ? se / static_cast<double>(elements) : 0.0;
  return out;
}

EvalResult evaluate_spline_baseline(const std::vector<Trajectory>& data,
                                    std::span<const int> indices) {
  EvalResult out;
  double se = 0.0;
  long long elements = 0;
  for (int idx : indices) {
    const Trajectory& traj = data[static_cast<std::size_t>(idx)];
    const CompensationSpline spline = natural_spline(traj);
    for (std::size_t i = 0; i < traj.values.size(); ++i) {
      const std::vector<double> got = eval_compensation(spline, traj.grid.points[i]);
      for (int d = 0; d < traj.dim; ++d) {
        const double diff = traj.values[i][static_cast<std::size_t>(d)] -
                            got[static_cast<std::size_t>(d)];
        se += diff * diff;
      }
      elements += traj.dim;
    }
    out.points += static_cast<long long>(traj.values.size());
    out.trajectories += 1;
  }
  out.mse = elements > 0 ? se / static_cast<double>(elements) : 0.0;
  return out;
}

}  // namespace cssc
