#pragma once

#include <string>

#include "crowdcast/dataio.hpp"
#include "crowdcast/optim.hpp"
#include "crowdcast/social.hpp"
#include "crowdcast/tensor.hpp"

namespace crowdcast {

// Network hyperparameters. Defaults are the artifact's declared
// configuration; everything can be overridden from the config file or CLI.
struct ModelConfig {
  int d_e = 32;        // embedding width
  int d_r = 16;        // offset embedding width
  int d_h = 32;        // interaction MLP hidden width
  int tcn_blocks = 3;  // residual temporal blocks
  int tcn_kernel = 3;  // odd, symmetric zero padding
  int extrap_kernel = 3;  // feature-axis kernel of the time extrapolator
  int t_obs = 8;
  int t_pred = 12;
  bool tcn_residual = true;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct TcnBlock {
  Tensor kernel;  // [k, d_e, d_e]
  Tensor bias;    // [d_e]
  Tensor slope;   // [1]
};

// Temporal stack plus the one-shot extrapolator: a convolution that treats
// the observed time axis as channels and emits all prediction steps at
// once, followed by a per-step linear head to the 5 raw output channels.
struct TemporalParams {
  std::vector<TcnBlock> blocks;
  Tensor extrap_kernel;  // [t_pred, t_obs, k]
  Tensor extrap_bias;    // [t_pred]
  Tensor extrap_slope;   // [1]
  Tensor head_weight;    // [d_e, 5]
  Tensor head_bias;      // [5]
};

// All learnable weights, flat by name so they can be tracked on a tape,
// stepped by SGD and checkpointed uniformly.
struct ModelParams {
  ModelConfig config;
  NamedTensors values;
};

// Seeded random initialization; PReLU slopes start at 0.25.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

// Assemble typed views over the flat parameter map (tracked or not).
SocialParams social_view(const NamedTensors& values);
TemporalParams temporal_view(const NamedTensors& values, const ModelConfig& config);

// Residual temporal convolution stack; output keeps shape [T, n, d_e].
Tensor tcn_forward(const Tensor& features, const TemporalParams& params, bool residual = true);

// Maps the observed time axis to the prediction horizon and emits raw
// distribution parameters [t_pred, n, 5].
Tensor extrapolate(const Tensor& features, const TemporalParams& params);

// Full composition over the observation segment of a window: embed
// displacements, score and aggregate pairwise interactions, fuse, run the
// temporal stack and extrapolate. Never reads steps past t_obs. When `tape`
// is null the parameters are used as constants.
Tensor model_forward(const DisplacementWindow& window, const NamedTensors& values,
                     const ModelConfig& config);

// Convenience overload that tracks parameters on the given tape and reports
// the tracked map (for gradient lookups).
Tensor model_forward(const DisplacementWindow& window, const ModelParams& params, Tape* tape,
                     NamedTensors* tracked_out = nullptr);

// Time-major observation tensors [t_obs, n, 2] from a displacement window.
Tensor observed_displacements(const DisplacementWindow& window);
Tensor observed_positions(const DisplacementWindow& window);

// Ground-truth tensors for the prediction segment, [t_pred, n, 2].
Tensor target_displacements(const DisplacementWindow& window);
Tensor future_positions(const SceneWindow& window);

}  // namespace crowdcast
