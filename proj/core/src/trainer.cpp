#include "crowdcast/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>

#include "crowdcast/checkpoint.hpp"
#include "crowdcast/errors.hpp"
#include "crowdcast/rng.hpp"

namespace crowdcast {

namespace {

// Rescales all gradients so their global L2 norm is at most max_norm. The
// Eq.-1 objective occasionally spikes when a sigma channel lags its mean;
// uncapped SGD at lr 0.01 then overflows within a few steps.
void clip_grad_norm(NamedTensors* grads, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, g] : *grads) {
    for (const double v : g.data()) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (auto& [name, g] : *grads) {
    std::vector<double> scaled(g.data());
    for (double& v : scaled) v *= scale;
    g = Tensor(g.shape(), std::move(scaled));
  }
}

double forward_nll_per_point(const std::vector<const SceneWindow*>& windows,
                             const NamedTensors& values, const ModelConfig& cfg) {
  double sum = 0.0;
  std::int64_t points = 0;
  for (const SceneWindow* w : windows) {
    const DisplacementWindow d = to_displacements(*w);
    const auto result = nll(decode_params(model_forward(d, values, cfg)), target_displacements(d));
    sum += result.sum.value();
    points += result.count;
  }
  return points ? sum / static_cast<double>(points) : 0.0;
}

}  // namespace

TrainResult train(const std::vector<SceneWindow>& windows, const ModelConfig& model_config,
                  const TrainConfig& train_config, const std::string& checkpoint_path) {
  if (windows.empty()) throw InputError("train: no windows");
  for (const auto& w : windows) {
    if (w.t_obs != model_config.t_obs || w.t_pred != model_config.t_pred) {
      throw ConfigError("train: window horizon " + std::to_string(w.t_obs) + "+" +
                        std::to_string(w.t_pred) + " does not match config " +
                        std::to_string(model_config.t_obs) + "+" +
                        std::to_string(model_config.t_pred));
    }
  }

  Rng rng(train_config.seed);

  // Scene-level split; stride-1 windows overlap heavily within a scene.
  std::set<std::string> scene_set;
  for (const auto& w : windows) scene_set.insert(w.scene_id);
  std::vector<std::string> scenes(scene_set.begin(), scene_set.end());
  for (std::size_t i = scenes.size(); i > 1; --i) {
    std::swap(scenes[i - 1], scenes[rng.below(i)]);
  }
  std::size_t n_val = static_cast<std::size_t>(
      std::floor(train_config.val_fraction * static_cast<double>(scenes.size())));
  if (scenes.size() > 1 && train_config.val_fraction > 0.0 && n_val == 0) n_val = 1;
  if (n_val >= scenes.size()) n_val = scenes.size() - 1;

  TrainResult result;
  std::set<std::string> val_set(scenes.begin(), scenes.begin() + static_cast<std::ptrdiff_t>(n_val));
  result.val_scenes.assign(val_set.begin(), val_set.end());
  for (const auto& s : scenes) {
    if (!val_set.count(s)) result.train_scenes.push_back(s);
  }
  std::sort(result.train_scenes.begin(), result.train_scenes.end());

  std::vector<const SceneWindow*> train_windows, val_windows;
  for (const auto& w : windows) {
    (val_set.count(w.scene_id) ? val_windows : train_windows).push_back(&w);
  }
  if (train_windows.empty()) throw InputError("train: validation split leaves no training windows");

  ModelParams params = init_params(model_config, rng.next_u64());
  result.best = params;
  result.best_epoch = 0;
  result.best_nll = std::numeric_limits<double>::infinity();

  const bool has_val = !val_windows.empty();
  std::vector<std::size_t> order(train_windows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
    const auto epoch_begin = std::chrono::steady_clock::now();
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    const double lr = train_config.lr / (1.0 + train_config.lr_decay * (epoch - 1));

    double epoch_sum = 0.0;
    std::int64_t epoch_points = 0;
    for (std::size_t batch_start = 0; batch_start < order.size();
         batch_start += static_cast<std::size_t>(train_config.batch_size)) {
      const std::size_t batch_end =
          std::min(order.size(), batch_start + static_cast<std::size_t>(train_config.batch_size));

      Tape tape;
      NamedTensors tracked = track_params(tape, params.values);
      Tensor batch_sum;
      std::int64_t batch_points = 0;
      for (std::size_t k = batch_start; k < batch_end; ++k) {
        const DisplacementWindow d = to_displacements(*train_windows[order[k]]);
        const auto r =
            nll(decode_params(model_forward(d, tracked, model_config)), target_displacements(d));
        batch_sum = k == batch_start ? r.sum : add(batch_sum, r.sum);
        batch_points += r.count;
      }
      const Tensor batch_loss = scalar_mul(batch_sum, 1.0 / static_cast<double>(batch_points));
      const double loss_value = batch_loss.value();
      if (!std::isfinite(loss_value)) {
        if (!checkpoint_path.empty()) save_checkpoint(checkpoint_path, result.best);
        throw NumericsError("train: non-finite loss at epoch " + std::to_string(epoch) +
                            "; last good checkpoint retained");
      }
      epoch_sum += loss_value * static_cast<double>(batch_points);
      epoch_points += batch_points;

      NamedTensors grads = grads_by_name(tape.backward(batch_loss), tracked);
      if (train_config.grad_clip > 0.0) clip_grad_norm(&grads, train_config.grad_clip);
      params.values = sgd_step(params.values, grads, lr);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_nll = epoch_sum / static_cast<double>(epoch_points);
    entry.val_nll = has_val ? forward_nll_per_point(val_windows, params.values, model_config)
                            : std::numeric_limits<double>::quiet_NaN();
    const double tracked_nll = has_val ? entry.val_nll : entry.train_nll;
    if (tracked_nll < result.best_nll) {
      result.best_nll = tracked_nll;
      result.best_epoch = epoch;
      result.best = params;
      if (!checkpoint_path.empty()) save_checkpoint(checkpoint_path, result.best);
    }
    entry.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_begin).count();
    result.log.push_back(entry);
  }

  result.last = params;
  return result;
}

std::string training_log_csv(const std::vector<EpochLog>& log) {
  std::string out = "epoch,train_nll,val_nll,wall_seconds\n";
  char buf[160];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.3f\n", e.epoch, e.train_nll, e.val_nll,
                  e.wall_seconds);
    out += buf;
  }
  return out;
}

EvalReport evaluate_with(const DistPredictor& predictor, const std::vector<SceneWindow>& windows,
                         int n_samples, std::uint64_t seed, bool select_per_metric) {
  if (n_samples < 1) throw DomainError("evaluate: n_samples must be >= 1");
  EvalReport report;
  report.samples_per_window = n_samples;
  Rng root(seed);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const SceneWindow& w = windows[i];
    const DisplacementWindow d = to_displacements(w);
    const BiGaussianSeq dist = predictor(d);
    Rng window_rng = root.fork(i);
    const BestOfN best = best_of_n(dist, d.origin, future_positions(w), n_samples, window_rng);
    report.add_window(w.group, best.ade, select_per_metric ? best.min_fde : best.fde, w.n_peds(),
                      w.t_pred);
  }
  return report;
}

EvalReport evaluate(const ModelParams& params, const std::vector<SceneWindow>& windows,
                    int n_samples, std::uint64_t seed, bool select_per_metric) {
  for (const auto& w : windows) {
    if (w.t_obs != params.config.t_obs || w.t_pred != params.config.t_pred) {
      throw ConfigError("evaluate: window horizon does not match checkpoint (" +
                        std::to_string(params.config.t_obs) + "+" +
                        std::to_string(params.config.t_pred) + ")");
    }
  }
  return evaluate_with(
      [&](const DisplacementWindow& d) {
        return decode_params(model_forward(d, params.values, params.config));
      },
      windows, n_samples, seed, select_per_metric);
}

EvalReport evaluate_trajectories(const TrajPredictor& predictor,
                                 const std::vector<SceneWindow>& windows) {
  EvalReport report;
  report.samples_per_window = 1;
  for (const auto& w : windows) {
    const Tensor pred = predictor(w);
    const Tensor gt = future_positions(w);
    report.add_window(w.group, ade(pred, gt), fde(pred, gt), w.n_peds(), w.t_pred);
  }
  return report;
}

}  // namespace crowdcast
