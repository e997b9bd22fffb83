// crowdcast: synthetic crowd generation, trajectory model training,
// best-of-N evaluation and preprocessing benchmarks in one binary.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "crowdcast/baselines.hpp"
#include "crowdcast/checkpoint.hpp"
#include "crowdcast/config.hpp"
#include "crowdcast/errors.hpp"
#include "crowdcast/gauss.hpp"
#include "crowdcast/metrics.hpp"
#include "crowdcast/seqnet.hpp"
#include "crowdcast/synth.hpp"
#include "crowdcast/trainer.hpp"

namespace crowdcast::cli {
namespace {

namespace fs = std::filesystem;

std::string format_double(double v, const char* fmt = "%.9g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
}

// All runs print the fully resolved configuration before doing work.
void print_config(const std::string& subcommand,
                  const std::vector<std::pair<std::string, std::string>>& kv) {
  std::cout << "[crowdcast " << subcommand << "] resolved configuration:\n";
  for (const auto& [key, value] : kv) {
    std::cout << "  " << key << " = " << value << "\n";
  }
}

std::vector<std::string> list_trajectory_files(const std::string& data_path) {
  std::vector<std::string> files;
  if (fs::is_directory(data_path)) {
    for (const auto& entry : fs::directory_iterator(data_path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") {
        files.push_back(entry.path().string());
      }
    }
    std::sort(files.begin(), files.end());
  } else if (fs::exists(data_path)) {
    files.push_back(data_path);
  }
  if (files.empty()) {
    throw InputError("no trajectory files found at '" + data_path + "'");
  }
  return files;
}

std::vector<SceneWindow> load_windows(const std::string& data_path, int t_obs, int t_pred,
                                      int stride, int downsample_k) {
  std::vector<SceneWindow> windows;
  for (const auto& file : list_trajectory_files(data_path)) {
    TrajectoryDataset ds = load_trajectories(file);
    if (downsample_k > 1) ds = downsample(ds, downsample_k);
    const auto ws = make_windows(ds, t_obs, t_pred, stride);
    windows.insert(windows.end(), ws.begin(), ws.end());
  }
  if (windows.empty()) {
    throw InputError("no full-length windows could be cut from '" + data_path +
                     "' (need " + std::to_string(t_obs + t_pred) + " consecutive frames)");
  }
  return windows;
}

// ---------------------------------------------------------------------- gen

struct GenArgs {
  std::string template_name = "crossing";
  int n_agents = 4;
  int scenes = 10;
  int steps = 30;
  std::uint64_t seed = 1;
  std::string out_dir = "data";
};

int run_gen(const GenArgs& args) {
  print_config("gen", {{"template", args.template_name},
                       {"n", std::to_string(args.n_agents)},
                       {"scenes", std::to_string(args.scenes)},
                       {"steps", std::to_string(args.steps)},
                       {"seed", std::to_string(args.seed)},
                       {"out", args.out_dir}});
  const SceneTemplate tmpl = parse_template(args.template_name);
  fs::create_directories(args.out_dir);
  std::string manifest = "file,template,n_agents,seed\n";
  for (int i = 0; i < args.scenes; ++i) {
    const std::uint64_t scene_seed = args.seed + static_cast<std::uint64_t>(i);
    const TrajectoryDataset ds = generate_scene(tmpl, args.n_agents, scene_seed, args.steps);
    char name[128];
    std::snprintf(name, sizeof(name), "scene_%04d_%s.txt", i, args.template_name.c_str());
    save_trajectories(ds, (fs::path(args.out_dir) / name).string());
    manifest += std::string(name) + "," + args.template_name + "," + std::to_string(args.n_agents) +
                "," + std::to_string(scene_seed) + "\n";
  }
  write_file((fs::path(args.out_dir) / "manifest.csv").string(), manifest);
  std::cout << "wrote " << args.scenes << " scenes to " << args.out_dir << "\n";
  return 0;
}

// -------------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string config_file;
  std::string checkpoint = "best.ckpt";
  std::string log_csv = "training_log.csv";
  ModelConfig model;
  TrainConfig train;
  int stride = 1;
  int downsample_k = 1;
};

int run_train(const TrainArgs& args) {
  print_config("train", {{"data", args.data},
                         {"config", args.config_file.empty() ? "(none)" : args.config_file},
                         {"checkpoint", args.checkpoint},
                         {"log", args.log_csv},
                         {"t_obs", std::to_string(args.model.t_obs)},
                         {"t_pred", std::to_string(args.model.t_pred)},
                         {"d_e", std::to_string(args.model.d_e)},
                         {"d_r", std::to_string(args.model.d_r)},
                         {"d_h", std::to_string(args.model.d_h)},
                         {"tcn_blocks", std::to_string(args.model.tcn_blocks)},
                         {"lr", format_double(args.train.lr)},
                         {"lr_decay", format_double(args.train.lr_decay)},
                         {"grad_clip", format_double(args.train.grad_clip)},
                         {"batch_size", std::to_string(args.train.batch_size)},
                         {"epochs", std::to_string(args.train.epochs)},
                         {"val_fraction", format_double(args.train.val_fraction)},
                         {"seed", std::to_string(args.train.seed)},
                         {"stride", std::to_string(args.stride)},
                         {"downsample", std::to_string(args.downsample_k)}});
  const auto windows =
      load_windows(args.data, args.model.t_obs, args.model.t_pred, args.stride, args.downsample_k);
  std::cout << "training on " << windows.size() << " windows\n";
  const TrainResult result = train(windows, args.model, args.train, args.checkpoint);
  save_checkpoint(args.checkpoint, result.best);
  write_file(args.log_csv, training_log_csv(result.log));
  std::cout << "best epoch " << result.best_epoch << " (nll " << format_double(result.best_nll)
            << "); checkpoint: " << args.checkpoint << "\n";
  return 0;
}

// --------------------------------------------------------------------- eval

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  int n_samples = 20;
  std::uint64_t seed = 1;
  std::string out_csv = "eval_report.csv";
  std::string out_table = "eval_report.txt";
  bool select_per_metric = false;
  int stride = 1;
  int downsample_k = 1;
};

std::vector<DensityGroup> groups_present(const std::vector<EvalReport>& reports) {
  std::vector<DensityGroup> out;
  for (const DensityGroup g : {DensityGroup::kGroup1, DensityGroup::kGroup2, DensityGroup::kGroup3,
                               DensityGroup::kUngrouped}) {
    for (const auto& r : reports) {
      if (r.by_group.count(g)) {
        out.push_back(g);
        break;
      }
    }
  }
  return out;
}

int run_eval(const EvalArgs& args) {
  print_config("eval", {{"checkpoint", args.checkpoint},
                        {"data", args.data},
                        {"n_samples", std::to_string(args.n_samples)},
                        {"seed", std::to_string(args.seed)},
                        {"out_csv", args.out_csv},
                        {"out_table", args.out_table},
                        {"select_per_metric", args.select_per_metric ? "true" : "false"},
                        {"stride", std::to_string(args.stride)},
                        {"downsample", std::to_string(args.downsample_k)}});
  const ModelParams params = load_checkpoint(args.checkpoint);
  const auto windows = load_windows(args.data, params.config.t_obs, params.config.t_pred,
                                    args.stride, args.downsample_k);
  std::cout << "evaluating " << windows.size() << " windows\n";

  // Deterministic baselines run with a single prediction; the model follows
  // the best-of-N protocol.
  const EvalReport lr_report = evaluate_trajectories(linear_regression_predict, windows);
  const EvalReport cv_report = evaluate_trajectories(constant_velocity_predict, windows);
  const EvalReport model_report =
      evaluate(params, windows, args.n_samples, args.seed, args.select_per_metric);

  const std::vector<EvalReport> reports{lr_report, cv_report, model_report};
  const std::vector<std::string> names{"lr", "constant-velocity", "social-iwstcnn"};
  const auto groups = groups_present(reports);

  auto bucket_of = [](const EvalReport& r, const DensityGroup* g) -> const MetricBucket* {
    if (g == nullptr) return &r.overall;
    const auto it = r.by_group.find(*g);
    return it == r.by_group.end() ? nullptr : &it->second;
  };

  std::string csv = "metric,group,n_windows," + names[0] + "," + names[1] + "," + names[2] + "\n";
  std::string table = "metric  group        windows  ";
  for (const auto& n : names) table += n + std::string(n.size() < 18 ? 18 - n.size() : 1, ' ');
  table += "\n";
  for (const char* metric : {"ade", "fde"}) {
    auto emit_row = [&](const std::string& label, const DensityGroup* g) {
      const MetricBucket* any = bucket_of(model_report, g);
      if (any == nullptr || any->n_windows == 0) return;
      csv += std::string(metric) + "," + label + "," + std::to_string(any->n_windows);
      char line[256];
      std::snprintf(line, sizeof(line), "%-7s %-12s %7lld  ", metric, label.c_str(),
                    static_cast<long long>(any->n_windows));
      table += line;
      for (const auto& r : reports) {
        const MetricBucket* b = bucket_of(r, g);
        const double v = b == nullptr ? 0.0
                         : std::string(metric) == "ade" ? b->ade()
                                                        : b->fde();
        csv += "," + format_double(v, "%.6f");
        std::snprintf(line, sizeof(line), "%-18.4f", v);
        table += line;
      }
      csv += "\n";
      table += "\n";
    };
    for (const auto g : groups) emit_row(density_group_name(g), &g);
    emit_row("all", nullptr);
  }
  table += "samples per window: model " + std::to_string(args.n_samples) + ", baselines 1\n";

  write_file(args.out_csv, csv);
  write_file(args.out_table, table);
  std::cout << table;
  return 0;
}

// ------------------------------------------------------------------ predict

struct PredictArgs {
  std::string checkpoint;
  std::string input;
  std::string out_csv = "predictions.csv";
  int horizon = 0;  // 0 = use the checkpoint's horizon
  int stride = 1;
  int downsample_k = 1;
};

int run_predict(const PredictArgs& args) {
  print_config("predict", {{"checkpoint", args.checkpoint},
                           {"input", args.input},
                           {"out", args.out_csv},
                           {"horizon", std::to_string(args.horizon)},
                           {"stride", std::to_string(args.stride)},
                           {"downsample", std::to_string(args.downsample_k)}});
  const ModelParams params = load_checkpoint(args.checkpoint);
  if (args.horizon != 0 && args.horizon != params.config.t_pred) {
    throw ConfigError("requested horizon " + std::to_string(args.horizon) +
                      " does not match the checkpoint's t_pred " +
                      std::to_string(params.config.t_pred) +
                      " (train a checkpoint with that horizon)");
  }

  TrajectoryDataset ds = load_trajectories(args.input);
  if (args.downsample_k > 1) ds = downsample(ds, args.downsample_k);
  const auto windows = make_observation_windows(ds, params.config.t_obs, args.stride);
  if (windows.empty()) {
    throw InputError("input has no " + std::to_string(params.config.t_obs) +
                     "-frame observation window");
  }

  std::string csv = "window_id,track_id,step,mu_x,mu_y,sigma_x,sigma_y,rho\n";
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const DisplacementWindow d = to_displacements(windows[i]);
    const BiGaussianSeq dist = decode_params(model_forward(d, params.values, params.config));
    append_distribution_csv(&csv, dist, d.track_ids, static_cast<int>(i));
  }
  write_file(args.out_csv, csv);
  std::cout << "wrote distributions for " << windows.size() << " windows to " << args.out_csv
            << "\n";
  return 0;
}

// -------------------------------------------------------------------- bench

struct BenchArgs {
  std::string mode = "both";
  int n_peds = 50;
  int n_windows = 64;
  int t_total = 20;
  int repeats = 20;
  std::uint64_t seed = 1;
  std::string out_csv = "bench_report.csv";
};

int run_bench(const BenchArgs& args) {
  print_config("bench", {{"mode", args.mode},
                         {"n_peds", std::to_string(args.n_peds)},
                         {"windows", std::to_string(args.n_windows)},
                         {"t", std::to_string(args.t_total)},
                         {"repeats", std::to_string(args.repeats)},
                         {"seed", std::to_string(args.seed)},
                         {"out", args.out_csv}});
  if (args.mode != "graph" && args.mode != "direct" && args.mode != "both") {
    throw ConfigError("bench --mode must be graph, direct or both");
  }

  // Identical synthetic inputs for both modes.
  Rng rng(args.seed);
  std::vector<SceneWindow> windows;
  for (int w = 0; w < args.n_windows; ++w) {
    SceneWindow sw;
    sw.t_obs = std::min(8, args.t_total - 1);
    sw.t_pred = args.t_total - sw.t_obs;
    sw.scene_id = "bench";
    for (int p = 0; p < args.n_peds; ++p) {
      sw.track_ids.push_back(p);
      double x = rng.uniform(-30, 30), y = rng.uniform(-30, 30);
      for (int t = 0; t < args.t_total; ++t) {
        sw.positions.push_back({x, y});
        x += rng.uniform(-0.6, 0.6);
        y += rng.uniform(-0.6, 0.6);
      }
    }
    sw.mask.assign(sw.positions.size(), 1);
    windows.push_back(std::move(sw));
  }

  const bool want_graph = args.mode != "direct";
  const bool want_direct = args.mode != "graph";
  BenchStats graph_stats, direct_stats;
  if (want_graph) graph_stats = bench_preprocess(windows, BenchMode::kGraph, args.repeats);
  if (want_direct) direct_stats = bench_preprocess(windows, BenchMode::kDirect, args.repeats);

  // Model inference per sequence for the total column (the rival network is
  // out of scope, so its inference cell stays empty).
  double inference_ms = 0.0;
  if (want_direct) {
    const ModelParams params = init_params(ModelConfig{}, args.seed);
    std::vector<double> times;
    for (int r = 0; r < std::max(3, args.repeats / 4); ++r) {
      const auto begin = std::chrono::steady_clock::now();
      for (const auto& w : windows) {
        const DisplacementWindow d = to_displacements(w);
        decode_params(model_forward(d, params.values, params.config));
      }
      const auto end = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double, std::milli>(end - begin).count() /
                      static_cast<double>(windows.size()));
    }
    std::sort(times.begin(), times.end());
    inference_ms = times[times.size() / 2];
  }

  std::string csv = "mode,preprocess_ms,preprocess_p10_ms,preprocess_p90_ms,inference_ms,total_ms\n";
  char line[256];
  if (want_graph) {
    std::snprintf(line, sizeof(line), "graph,%.6f,%.6f,%.6f,,%.6f\n", graph_stats.median_ms,
                  graph_stats.p10_ms, graph_stats.p90_ms, graph_stats.median_ms);
    csv += line;
  }
  if (want_direct) {
    std::snprintf(line, sizeof(line), "direct,%.6f,%.6f,%.6f,%.6f,%.6f\n", direct_stats.median_ms,
                  direct_stats.p10_ms, direct_stats.p90_ms, inference_ms,
                  direct_stats.median_ms + inference_ms);
    csv += line;
  }
  if (want_graph && want_direct) {
    const double ratio = graph_stats.median_ms / direct_stats.median_ms;
    std::snprintf(line, sizeof(line),
                  "# preprocessing speedup direct vs graph: %.1fx (reference reports 54.8x; "
                  "absolute times are hardware-specific and not reproducible here)\n",
                  ratio);
    csv += line;
    std::cout << line;
  }
  write_file(args.out_csv, csv);
  std::cout << "wrote " << args.out_csv << "\n";
  return 0;
}

// --------------------------------------------------------------------- main

int dispatch(int argc, char** argv) {
  CLI::App app{"crowdcast: pedestrian trajectory prediction workbench"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate synthetic social-force scenes");
  gen_cmd->add_option("--template", gen.template_name,
                      "parallel|merge|crossing|group-meet|dense-crowd");
  gen_cmd->add_option("--n", gen.n_agents, "agents per scene");
  gen_cmd->add_option("--scenes", gen.scenes, "number of scenes");
  gen_cmd->add_option("--steps", gen.steps, "output steps per scene at 2.5 Hz");
  gen_cmd->add_option("--seed", gen.seed, "base seed")->envname("CROWDCAST_SEED");
  gen_cmd->add_option("--out", gen.out_dir, "output directory");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train the model on trajectory files");
  train_cmd->add_option("--data", tr.data, "trajectory file or directory")->required();
  train_cmd->add_option("--config", tr.config_file, "key = value configuration file");
  train_cmd->add_option("--checkpoint", tr.checkpoint, "checkpoint output path");
  train_cmd->add_option("--log", tr.log_csv, "training log CSV path");
  auto* opt_epochs = train_cmd->add_option("--epochs", tr.train.epochs, "training epochs");
  auto* opt_lr = train_cmd->add_option("--lr", tr.train.lr, "learning rate");
  auto* opt_lr_decay = train_cmd->add_option("--lr-decay", tr.train.lr_decay,
                                             "per-epoch lr decay factor (0 = constant)");
  auto* opt_clip = train_cmd->add_option("--grad-clip", tr.train.grad_clip,
                                         "global gradient-norm cap (0 = off)");
  auto* opt_batch = train_cmd->add_option("--batch", tr.train.batch_size, "batch size");
  auto* opt_val = train_cmd->add_option("--val-fraction", tr.train.val_fraction,
                                        "fraction of scenes held out for validation");
  auto* opt_seed = train_cmd->add_option("--seed", tr.train.seed, "seed")->envname("CROWDCAST_SEED");
  auto* opt_tobs = train_cmd->add_option("--t-obs", tr.model.t_obs, "observation steps");
  auto* opt_tpred = train_cmd->add_option("--t-pred", tr.model.t_pred, "prediction steps");
  auto* opt_de = train_cmd->add_option("--d-e", tr.model.d_e, "embedding width");
  train_cmd->add_option("--stride", tr.stride, "window stride");
  train_cmd->add_option("--downsample", tr.downsample_k, "keep every k-th frame");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint against the baselines");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "checkpoint path")->required();
  eval_cmd->add_option("--data", ev.data, "trajectory file or directory")->required();
  eval_cmd->add_option("--n-samples", ev.n_samples, "samples per window (best-of-N)");
  eval_cmd->add_option("--seed", ev.seed, "seed")->envname("CROWDCAST_SEED");
  eval_cmd->add_option("--out-csv", ev.out_csv, "report CSV path");
  eval_cmd->add_option("--out-table", ev.out_table, "report text table path");
  eval_cmd->add_flag("--select-per-metric", ev.select_per_metric,
                     "report the minimum FDE over samples instead of the best-ADE sample's FDE");
  eval_cmd->add_option("--stride", ev.stride, "window stride");
  eval_cmd->add_option("--downsample", ev.downsample_k, "keep every k-th frame");

  PredictArgs pr;
  auto* predict_cmd = app.add_subcommand("predict", "emit per-step distributions for a file");
  predict_cmd->add_option("--checkpoint", pr.checkpoint, "checkpoint path")->required();
  predict_cmd->add_option("--input", pr.input, "trajectory file")->required();
  predict_cmd->add_option("--out", pr.out_csv, "output CSV path");
  predict_cmd->add_option("--horizon", pr.horizon, "prediction steps (must match checkpoint)");
  predict_cmd->add_option("--stride", pr.stride, "window stride");
  predict_cmd->add_option("--downsample", pr.downsample_k, "keep every k-th frame");

  BenchArgs be;
  auto* bench_cmd = app.add_subcommand("bench", "preprocessing benchmark: graph vs direct");
  bench_cmd->add_option("--mode", be.mode, "graph|direct|both");
  bench_cmd->add_option("--n-peds", be.n_peds, "pedestrians per window");
  bench_cmd->add_option("--windows", be.n_windows, "number of windows");
  bench_cmd->add_option("--t", be.t_total, "steps per window");
  bench_cmd->add_option("--repeats", be.repeats, "timed repetitions");
  bench_cmd->add_option("--seed", be.seed, "seed")->envname("CROWDCAST_SEED");
  bench_cmd->add_option("--out", be.out_csv, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);  // prints usage; nonzero on error
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*train_cmd) {
      // Precedence: defaults < config file < command line.
      if (!tr.config_file.empty()) {
        const ConfigFile cfg = ConfigFile::load(tr.config_file);
        cfg.check_known();
        ModelConfig file_model;
        TrainConfig file_train;
        cfg.apply(&file_model);
        cfg.apply(&file_train);
        if (opt_epochs->count()) file_train.epochs = tr.train.epochs;
        if (opt_lr->count()) file_train.lr = tr.train.lr;
        if (opt_lr_decay->count()) file_train.lr_decay = tr.train.lr_decay;
        if (opt_clip->count()) file_train.grad_clip = tr.train.grad_clip;
        if (opt_batch->count()) file_train.batch_size = tr.train.batch_size;
        if (opt_val->count()) file_train.val_fraction = tr.train.val_fraction;
        if (opt_seed->count()) file_train.seed = tr.train.seed;
        if (opt_tobs->count()) file_model.t_obs = tr.model.t_obs;
        if (opt_tpred->count()) file_model.t_pred = tr.model.t_pred;
        if (opt_de->count()) file_model.d_e = tr.model.d_e;
        std::swap(file_model, tr.model);
        std::swap(file_train, tr.train);
      }
      return run_train(tr);
    }
    if (*eval_cmd) return run_eval(ev);
    if (*predict_cmd) return run_predict(pr);
    if (*bench_cmd) return run_bench(be);
  } catch (const ShapeError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const RankError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const TapeError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    // Parse, config, input, domain, numerics and IO problems are user-visible
    // conditions with actionable messages.
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace
}  // namespace crowdcast::cli

int main(int argc, char** argv) { return crowdcast::cli::dispatch(argc, argv); }
