#pragma once

#include <functional>
#include <string>
#include <vector>

#include "crowdcast/config.hpp"
#include "crowdcast/gauss.hpp"
#include "crowdcast/metrics.hpp"
#include "crowdcast/seqnet.hpp"

namespace crowdcast {

struct EpochLog {
  int epoch = 0;
  double train_nll = 0.0;  // per-point, averaged over the epoch's batches
  double val_nll = 0.0;    // NaN when there is no validation split
  double wall_seconds = 0.0;
};

struct TrainResult {
  ModelParams best;   // parameters at the best validation epoch
  ModelParams last;   // parameters after the final epoch
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_nll = 0.0;
  std::vector<std::string> train_scenes;
  std::vector<std::string> val_scenes;
};

// Per §-protocol training: seeded shuffle, fixed-size batches, Eq.-style
// NLL on displacement targets (mean per point), plain SGD. Windows are
// split into train/validation by scene id, never by window, because
// stride-1 windows of one scene overlap. A non-finite loss aborts with
// NumericsError after writing the last good checkpoint.
TrainResult train(const std::vector<SceneWindow>& windows, const ModelConfig& model_config,
                  const TrainConfig& train_config, const std::string& checkpoint_path = "");

std::string training_log_csv(const std::vector<EpochLog>& log);

// Best-of-N evaluation of the model over windows, aggregated per density
// group. Each window gets its own forked rng stream, so results do not
// depend on evaluation order.
EvalReport evaluate(const ModelParams& params, const std::vector<SceneWindow>& windows,
                    int n_samples, std::uint64_t seed, bool select_per_metric = false);

// Same protocol with an injected distribution source (used to check the
// evaluation machinery against a teacher-forced oracle).
using DistPredictor = std::function<BiGaussianSeq(const DisplacementWindow&)>;
EvalReport evaluate_with(const DistPredictor& predictor, const std::vector<SceneWindow>& windows,
                         int n_samples, std::uint64_t seed, bool select_per_metric = false);

// Deterministic single-shot predictors (linear regression, constant
// velocity) evaluated with N = 1.
using TrajPredictor = std::function<Tensor(const SceneWindow&)>;
EvalReport evaluate_trajectories(const TrajPredictor& predictor,
                                 const std::vector<SceneWindow>& windows);

}  // namespace crowdcast
