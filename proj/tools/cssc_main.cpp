#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cssc/checkpoint.hpp"
#include "cssc/core.hpp"
#include "cssc/data.hpp"
#include "cssc/errors.hpp"
#include "cssc/odernn.hpp"
#include "cssc/study.hpp"
#include "cssc/train.hpp"

namespace {

using namespace cssc;

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::invalid_spec:
    case Errc::unknown_function:
      return 2;
    case Errc::non_finite_loss:
    case Errc::non_finite_state:
      return 3;
    case Errc::parse_error:
    case Errc::checkpoint_mismatch:
    case Errc::non_monotone_time:
    case Errc::dimension_mismatch:
    case Errc::endpoint_not_observed:
    case Errc::length_mismatch:
    case Errc::incomplete_knot_data:
      return 4;
    default:
      return 1;
  }
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path == "-") return std::cout;
  file.open(path);
  if (!file) raise(Errc::parse_error, "cannot write " + path);
  return file;
}

std::string trimmed(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Plain key=value defaults file. Keys are long option names without the
// leading dashes; '#' starts a comment. Every key becomes a --key=value
// token unless that option already appears on the command line, so explicit
// flags always win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size();) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) raise(Errc::parse_error, "cannot open config " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trimmed(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      raise(Errc::parse_error, path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trimmed(body.substr(0, eq));
    const std::string value = trimmed(body.substr(eq + 1));
    if (key.empty()) {
      raise(Errc::parse_error, path + ":" + std::to_string(line_no) + ": empty key");
    }
    const std::string flag = "--" + key;
    bool overridden = false;
    for (const std::string& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        overridden = true;
        break;
      }
    }
    if (!overridden) args.push_back(flag + "=" + value);
  }
  return args;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Model/optimizer settings shared by train and ablate.
struct ModelFlags {
  RunConfig cfg;
  std::string mode = "cssc";
  std::string deriv = "analytical";

  void add_to(CLI::App& cmd) {
    cmd.add_option("--mode", mode, "compensation variant")
        ->check(CLI::IsMember({"cssc", "hidden", "odernn"}))
        ->capture_default_str();
    cmd.add_option("--deriv", deriv, "knot derivative extraction")
        ->check(CLI::IsMember({"analytical", "numerical"}))
        ->capture_default_str();
    cmd.add_option("--alpha", cfg.alpha, "compensation penalty weight")->capture_default_str();
    cmd.add_option("--delta", cfg.numerical_delta, "numerical probe spacing")
        ->capture_default_str();
    cmd.add_option("--hidden-dim", cfg.hidden_dim, "hidden state size")->capture_default_str();
    cmd.add_option("--f-hidden", cfg.f_hidden, "dynamics net hidden widths")
        ->delimiter(',')
        ->capture_default_str();
    cmd.add_option("--g-hidden", cfg.g_hidden, "decoder hidden widths")
        ->delimiter(',')
        ->capture_default_str();
    cmd.add_option("--cell-embed", cfg.cell_input_embed,
                   "cell input embedding width (0 = raw input)")
        ->capture_default_str();
    cmd.add_option("--substeps", cfg.substeps, "integrator steps per knot interval")
        ->capture_default_str();
    cmd.add_flag("--strict-boundary", cfg.strict_natural_boundary,
                 "cancel base-curve curvature at the ends");
    cmd.add_flag("--block-dot-o", cfg.block_dot_o, "detach first-derivative jumps");
    cmd.add_flag("--block-ddot-o", cfg.block_ddot_o, "detach second-derivative jumps");
    cmd.add_flag("--drop-ddot-o", cfg.drop_ddot_o, "zero second-derivative jumps");
    cmd.add_option("--lr", cfg.learning_rate, "optimizer step size")->capture_default_str();
    cmd.add_option("--beta1", cfg.beta1, "first-moment decay")->capture_default_str();
    cmd.add_option("--beta2", cfg.beta2, "infinity-moment decay")->capture_default_str();
    cmd.add_option("--seed", cfg.seed, "parameter init seed")->capture_default_str();
  }

  RunConfig resolve() const {
    RunConfig out = cfg;
    out.compensation_space = mode == "cssc"    ? CompensationSpace::output
                             : mode == "hidden" ? CompensationSpace::hidden
                                                : CompensationSpace::none;
    out.derivative_mode = deriv == "analytical" ? DerivativeMode::analytical
                                                : DerivativeMode::numerical;
    return out;
  }
};

struct SplitFlags {
  double train_frac = 0.8;
  double val_frac = 0.1;
  std::uint64_t split_seed = 0;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--train-frac", train_frac, "training fraction of trajectories")
        ->capture_default_str();
    cmd.add_option("--val-frac", val_frac, "validation fraction of trajectories")
        ->capture_default_str();
    cmd.add_option("--split-seed", split_seed, "trajectory split seed")->capture_default_str();
  }
};

int cmd_generate(const std::string& kind, const ToySpec& toy, const std::vector<int>& levels,
                 const std::string& out_path) {
  if (kind == "toy") {
    write_trajectories(out_path, generate_toy(toy));
  } else {
    std::vector<Trajectory> all;
    for (const SmoothFunction& fn : smooth_suite()) {
      for (int level : levels) all.push_back(sample_smooth(fn, level));
    }
    write_trajectories(out_path, all);
  }
  return 0;
}

int cmd_train(const ModelFlags& model_flags, const SplitFlags& split_flags,
              const std::string& data_path, const std::string& ckpt_path,
              std::string metrics_path, const TrainOptions& opts_in) {
  const std::vector<Trajectory> data = read_trajectories(data_path);
  if (data.empty()) raise(Errc::invalid_spec, data_path + " holds no trajectories");
  const RunConfig cfg = model_flags.resolve();
  OdeRnnModel model(cfg, data.front().dim);
  model.init_params();

  const DatasetSplit split = split_dataset(static_cast<int>(data.size()),
                                           split_flags.train_frac, split_flags.val_frac,
                                           split_flags.split_seed);
  TrainOptions opts = opts_in;
  if (metrics_path.empty()) metrics_path = ckpt_path + ".metrics.csv";
  opts.metrics_path = metrics_path;

  const TrainResult result = train(model, data, split, opts);
  save_checkpoint(ckpt_path, cfg, model.data_dim(), model.params());
  std::cerr << "trained " << result.epochs_run << " epochs, best epoch " << result.best_epoch
            << ", val mse " << num(result.best_val_mse) << "\n";
  return 0;
}

double observed_fraction(const std::vector<Trajectory>& data) {
  long long seen = 0, total = 0;
  for (const Trajectory& traj : data) {
    seen += traj.observed_count();
    total += static_cast<long long>(traj.observed.size());
  }
  return total > 0 ? static_cast<double>(seen) / static_cast<double>(total) : 0.0;
}

std::vector<int> pick_indices(int count, const std::string& which, const SplitFlags& sf) {
  if (which == "all") {
    std::vector<int> idx(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) idx[static_cast<std::size_t>(i)] = i;
    return idx;
  }
  const DatasetSplit split = split_dataset(count, sf.train_frac, sf.val_frac, sf.split_seed);
  if (which == "train") return split.train;
  if (which == "val") return split.val;
  return split.test;
}

int cmd_evaluate(const std::vector<std::string>& data_paths,
                 const std::vector<std::string>& modes, const std::string& ckpt_path,
                 const std::string& which, const SplitFlags& split_flags,
                 const std::string& out_path) {
  bool needs_model = false;
  std::vector<EvalMode> parsed;
  for (const std::string& m : modes) {
    parsed.push_back(eval_mode_from_string(m));
    needs_model = needs_model || parsed.back() != EvalMode::spline_baseline;
  }
  std::unique_ptr<OdeRnnModel> model;
  if (needs_model) {
    if (ckpt_path.empty()) {
      raise(Errc::invalid_spec, "model-based modes need --ckpt");
    }
    const CheckpointHeader header = read_checkpoint_header(ckpt_path);
    model = std::make_unique<OdeRnnModel>(header.config, header.data_dim);
    load_checkpoint_params(ckpt_path, model->params());
  }

  std::ofstream file;
  std::ostream& out = open_out(out_path, file);
  out << "mode,file,fraction,mse,points,trajectories\n";
  for (const std::string& path : data_paths) {
    const std::vector<Trajectory> data = read_trajectories(path);
    const std::vector<int> indices =
        pick_indices(static_cast<int>(data.size()), which, split_flags);
    const double fraction = observed_fraction(data);
    for (std::size_t m = 0; m < parsed.size(); ++m) {
      const EvalResult r = parsed[m] == EvalMode::spline_baseline
                               ? evaluate_spline_baseline(data, indices)
                               : evaluate(*model, data, indices, parsed[m]);
      out << modes[m] << ',' << path << ',' << num(fraction) << ',' << num(r.mse) << ','
          << r.points << ',' << r.trajectories << '\n';
    }
  }
  return 0;
}

int cmd_convergence(const std::vector<std::string>& names, const std::vector<int>& levels,
                    int dense, const std::string& out_path) {
  nlohmann::json doc;
  doc["functions"] = nlohmann::json::array();
  bool all_ok = true;
  for (const std::string& name : names) {
    const ConvergenceReport report = run_convergence_study(smooth_by_name(name), levels, dense);
    nlohmann::json jr;
    jr["function"] = report.function;
    jr["value_slope"] = report.value_slope;
    jr["deriv_slope"] = report.deriv_slope;
    jr["bound_ok"] = report.bound_ok;
    jr["levels"] = nlohmann::json::array();
    for (const LevelReport& level : report.levels) {
      jr["levels"].push_back({{"intervals", level.intervals},
                              {"tau", level.tau},
                              {"value_err", level.value_err},
                              {"deriv_err", level.deriv_err},
                              {"value_ratio", level.value_ratio},
                              {"deriv_ratio", level.deriv_ratio}});
    }
    doc["functions"].push_back(jr);
    all_ok = all_ok && report.bound_ok;
  }
  doc["all_ok"] = all_ok;
  std::ofstream file;
  std::ostream& out = open_out(out_path, file);
  out << doc.dump(2) << "\n";
  if (!all_ok) {
    std::cerr << "interpolation error exceeded the bound at some level\n";
    return 5;
  }
  return 0;
}

int cmd_ablate(const ModelFlags& model_flags, const SplitFlags& split_flags,
               const std::string& data_path, const std::string& sweep,
               const TrainOptions& opts_in, const std::string& out_path) {
  const std::vector<Trajectory> data = read_trajectories(data_path);
  if (data.empty()) raise(Errc::invalid_spec, data_path + " holds no trajectories");
  const DatasetSplit split = split_dataset(static_cast<int>(data.size()),
                                           split_flags.train_frac, split_flags.val_frac,
                                           split_flags.split_seed);
  TrainOptions opts = opts_in;
  opts.metrics_path.clear();

  struct Setting {
    std::string name;
    RunConfig cfg;
  };
  std::vector<Setting> settings;
  const RunConfig base = model_flags.resolve();
  if (sweep == "alpha") {
    for (double a : {0.0, 1.0, 10.0, 100.0, 1000.0, 10000.0}) {
      RunConfig cfg = base;
      cfg.alpha = a;
      settings.push_back({"alpha=" + num(a), cfg});
    }
  } else {
    RunConfig cfg = base;
    settings.push_back({"full", cfg});
    cfg = base;
    cfg.block_dot_o = true;
    settings.push_back({"block_dot_o", cfg});
    cfg = base;
    cfg.block_ddot_o = true;
    settings.push_back({"block_ddot_o", cfg});
    cfg = base;
    cfg.drop_ddot_o = true;
    settings.push_back({"drop_ddot_o", cfg});
  }

  std::ofstream file;
  std::ostream& out = open_out(out_path, file);
  out << "sweep,setting,epochs,train_mse,val_mse,test_mse\n";
  const EvalMode eval_mode = base.compensation_space == CompensationSpace::output
                                 ? EvalMode::cssc
                             : base.compensation_space == CompensationSpace::hidden
                                 ? EvalMode::hidden
                                 : EvalMode::odernn;
  for (const Setting& setting : settings) {
    OdeRnnModel model(setting.cfg, data.front().dim);
    model.init_params();
    const TrainResult result = train(model, data, split, opts);
    const EvalResult test = evaluate(model, data, split.test, eval_mode);
    out << sweep << ',' << setting.name << ',' << result.epochs_run << ','
        << num(result.train_mse.back()) << ',' << num(result.best_val_mse) << ','
        << num(test.mse) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cubic-compensated ODE-RNN interpolation toolkit"};
  app.require_subcommand(1);
  int rc = 0;
  constexpr const char* kConfigHelp =
      "plain key=value defaults file; explicit flags win";
  std::string config_doc;  // consumed before parsing, registered for --help

  // generate
  auto* gen = app.add_subcommand("generate", "sample a dataset to JSONL");
  std::string gen_kind = "toy";
  ToySpec toy;
  std::vector<int> gen_levels = {32};
  std::string gen_out;
  gen->add_option("--kind", gen_kind, "dataset family")
      ->check(CLI::IsMember({"toy", "smooth"}))
      ->capture_default_str();
  gen->add_option("--count", toy.count, "trajectory count")->capture_default_str();
  gen->add_option("--points", toy.points, "grid points per trajectory")->capture_default_str();
  gen->add_option("--t-end", toy.t_end, "time horizon")->capture_default_str();
  gen->add_option("--fraction", toy.observe_fraction, "observed fraction of grid points")
      ->capture_default_str();
  gen->add_flag("--jitter", toy.jitter, "jitter interior time stamps");
  gen->add_option("--seed", toy.seed, "generation seed")->capture_default_str();
  gen->add_option("--levels", gen_levels, "interval counts for --kind smooth")
      ->delimiter(',')
      ->capture_default_str();
  gen->add_option("--out", gen_out, "output JSONL path")->required();
  gen->add_option("--config", config_doc, kConfigHelp);
  gen->callback([&] { rc = cmd_generate(gen_kind, toy, gen_levels, gen_out); });

  // train
  auto* tr = app.add_subcommand("train", "fit a model and write a checkpoint");
  ModelFlags tr_model;
  SplitFlags tr_split;
  TrainOptions tr_opts;
  std::string tr_data, tr_ckpt, tr_metrics;
  tr->add_option("--data", tr_data, "training JSONL")->required();
  tr->add_option("--ckpt", tr_ckpt, "checkpoint output path")->required();
  tr->add_option("--metrics", tr_metrics, "per-epoch CSV path (default <ckpt>.metrics.csv)");
  tr->add_option("--epochs", tr_opts.epochs, "epoch budget")->capture_default_str();
  tr->add_option("--patience", tr_opts.patience, "early-stopping patience")
      ->capture_default_str();
  tr->add_option("--threads", tr_opts.threads, "worker threads")->capture_default_str();
  tr_model.add_to(*tr);
  tr_split.add_to(*tr);
  tr->add_option("--config", config_doc, kConfigHelp);
  tr->callback([&] { rc = cmd_train(tr_model, tr_split, tr_data, tr_ckpt, tr_metrics, tr_opts); });

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "interpolation MSE table");
  std::vector<std::string> ev_data, ev_modes;
  std::string ev_ckpt, ev_out = "-", ev_which = "all";
  SplitFlags ev_split;
  ev->add_option("--data", ev_data, "evaluation JSONL files")->delimiter(',')->required();
  ev->add_option("--mode", ev_modes, "evaluation modes")
      ->delimiter(',')
      ->required()
      ->check(CLI::IsMember({"cssc", "hidden", "odernn", "posthoc", "prehoc",
                             "spline_baseline"}));
  ev->add_option("--ckpt", ev_ckpt, "checkpoint path (model-based modes)");
  ev->add_option("--split", ev_which, "trajectory subset")
      ->check(CLI::IsMember({"all", "train", "val", "test"}))
      ->capture_default_str();
  ev->add_option("--out", ev_out, "CSV path or - for stdout")->capture_default_str();
  ev_split.add_to(*ev);
  ev->add_option("--config", config_doc, kConfigHelp);
  ev->callback(
      [&] { rc = cmd_evaluate(ev_data, ev_modes, ev_ckpt, ev_which, ev_split, ev_out); });

  // convergence
  auto* cv = app.add_subcommand("convergence", "interpolation error bound study");
  std::vector<std::string> cv_names = {"sin", "gauss", "poly5"};
  std::vector<int> cv_levels = {16, 32, 64, 128, 256};
  int cv_dense = 10001;
  std::string cv_out = "-";
  cv->add_option("--function", cv_names, "smooth suite members")
      ->delimiter(',')
      ->capture_default_str();
  cv->add_option("--levels", cv_levels, "interval counts")->delimiter(',')->capture_default_str();
  cv->add_option("--dense", cv_dense, "reference grid size")->capture_default_str();
  cv->add_option("--out", cv_out, "JSON path or - for stdout")->capture_default_str();
  cv->add_option("--config", config_doc, kConfigHelp);
  cv->callback([&] { rc = cmd_convergence(cv_names, cv_levels, cv_dense, cv_out); });

  // ablate
  auto* ab = app.add_subcommand("ablate", "penalty weight or gradient-path sweep");
  ModelFlags ab_model;
  SplitFlags ab_split;
  TrainOptions ab_opts;
  ab_opts.epochs = 60;
  std::string ab_data, ab_sweep = "alpha", ab_out = "-";
  ab->add_option("--data", ab_data, "training JSONL")->required();
  ab->add_option("--sweep", ab_sweep, "sweep family")
      ->check(CLI::IsMember({"alpha", "gradient"}))
      ->capture_default_str();
  ab->add_option("--epochs", ab_opts.epochs, "epoch budget per setting")->capture_default_str();
  ab->add_option("--patience", ab_opts.patience, "early-stopping patience")
      ->capture_default_str();
  ab->add_option("--threads", ab_opts.threads, "worker threads")->capture_default_str();
  ab->add_option("--out", ab_out, "CSV path or - for stdout")->capture_default_str();
  ab_model.add_to(*ab);
  ab_split.add_to(*ab);
  ab->add_option("--config", config_doc, kConfigHelp);
  ab->callback([&] { rc = cmd_ablate(ab_model, ab_split, ab_data, ab_sweep, ab_opts, ab_out); });

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const cssc::Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
