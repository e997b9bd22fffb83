#include "crowdcast/seqnet.hpp"

#include <cmath>

#include "crowdcast/errors.hpp"
#include "crowdcast/rng.hpp"

namespace crowdcast {

namespace {

Tensor random_init(Rng& rng, Shape shape, double scale) {
  std::vector<double> data(static_cast<std::size_t>(shape_size(shape)));
  for (double& v : data) v = rng.normal(0.0, scale);
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  ModelParams p;
  p.config = cfg;
  auto& v = p.values;

  const double embed_scale = 1.0 / std::sqrt(2.0);
  v.emplace("social.w_embed", random_init(rng, {2, cfg.d_e}, embed_scale));
  v.emplace("social.w_offset", random_init(rng, {2, cfg.d_r}, embed_scale));
  v.emplace("social.w_score1", random_init(rng, {cfg.d_r, cfg.d_h}, std::sqrt(2.0 / cfg.d_r)));
  v.emplace("social.b_score1", Tensor::zeros({cfg.d_h}));
  v.emplace("social.slope_score", Tensor({1}, {0.25}));
  // Zero-initialized scorer output: interaction weights start at zero, so
  // untrained attention cannot amplify large position offsets; the branch
  // comes in through its gradient.
  v.emplace("social.w_score2", Tensor::zeros({cfg.d_h, 1}));
  v.emplace("social.b_score2", Tensor::zeros({1}));
  v.emplace("social.w_fuse", random_init(rng, {2 * cfg.d_e, 2 * cfg.d_e}, std::sqrt(2.0 / (2 * cfg.d_e))));
  v.emplace("social.b_fuse", Tensor::zeros({2 * cfg.d_e}));
  v.emplace("social.slope_fuse", Tensor({1}, {0.25}));

  for (int b = 0; b < cfg.tcn_blocks; ++b) {
    const std::string prefix = "tcn." + std::to_string(b) + ".";
    v.emplace(prefix + "kernel",
              random_init(rng, {cfg.tcn_kernel, cfg.d_e, cfg.d_e},
                          std::sqrt(2.0 / (cfg.tcn_kernel * cfg.d_e))));
    v.emplace(prefix + "bias", Tensor::zeros({cfg.d_e}));
    v.emplace(prefix + "slope", Tensor({1}, {0.25}));
  }

  v.emplace("extrap.kernel", random_init(rng, {cfg.t_pred, cfg.t_obs, cfg.extrap_kernel},
                                         std::sqrt(2.0 / (cfg.t_obs * cfg.extrap_kernel))));
  v.emplace("extrap.bias", Tensor::zeros({cfg.t_pred}));
  v.emplace("extrap.slope", Tensor({1}, {0.25}));
  // Small head weights; the sigma-channel biases start near the per-step
  // displacement scale instead of exp(0) = 1 m.
  v.emplace("head.weight", random_init(rng, {cfg.d_e, 5}, 0.01));
  v.emplace("head.bias", Tensor({5}, {0.0, 0.0, -1.4, -1.4, 0.0}));
  return p;
}

SocialParams social_view(const NamedTensors& v) {
  return SocialParams{
      v.at("social.w_embed"),  v.at("social.w_offset"), v.at("social.w_score1"),
      v.at("social.b_score1"), v.at("social.slope_score"), v.at("social.w_score2"),
      v.at("social.b_score2"), v.at("social.w_fuse"),   v.at("social.b_fuse"),
      v.at("social.slope_fuse")};
}

TemporalParams temporal_view(const NamedTensors& v, const ModelConfig& cfg) {
  TemporalParams t;
  for (int b = 0; b < cfg.tcn_blocks; ++b) {
    const std::string prefix = "tcn." + std::to_string(b) + ".";
    t.blocks.push_back({v.at(prefix + "kernel"), v.at(prefix + "bias"), v.at(prefix + "slope")});
  }
  t.extrap_kernel = v.at("extrap.kernel");
  t.extrap_bias = v.at("extrap.bias");
  t.extrap_slope = v.at("extrap.slope");
  t.head_weight = v.at("head.weight");
  t.head_bias = v.at("head.bias");
  return t;
}

Tensor tcn_forward(const Tensor& features, const TemporalParams& params, bool residual) {
  Tensor x = features;
  for (const TcnBlock& block : params.blocks) {
    const Tensor convolved = add(conv_temporal(x, block.kernel), block.bias);
    const Tensor activated = prelu(convolved, block.slope);
    x = residual ? add(activated, x) : activated;
  }
  return x;
}

Tensor extrapolate(const Tensor& features, const TemporalParams& params) {
  const int t_pred = params.extrap_kernel.shape()[0];
  const Tensor expanded = add(conv_channel_time(features, params.extrap_kernel),
                              reshape(params.extrap_bias, {t_pred, 1, 1}));
  const Tensor activated = prelu(expanded, params.extrap_slope);
  return add(matmul(activated, params.head_weight), params.head_bias);  // [t_pred, n, 5]
}

Tensor observed_displacements(const DisplacementWindow& window) {
  const int t_obs = window.t_obs, n = window.n_peds(), t = window.t_total();
  std::vector<double> data(static_cast<std::size_t>(t_obs) * n * 2);
  for (int step = 0; step < t_obs; ++step) {
    for (int ped = 0; ped < n; ++ped) {
      const auto& d = window.displacements[static_cast<std::size_t>(ped) * t + step];
      data[(static_cast<std::size_t>(step) * n + ped) * 2] = d[0];
      data[(static_cast<std::size_t>(step) * n + ped) * 2 + 1] = d[1];
    }
  }
  return Tensor({t_obs, n, 2}, std::move(data));
}

Tensor observed_positions(const DisplacementWindow& window) {
  const int t_obs = window.t_obs, n = window.n_peds(), t = window.t_total();
  std::vector<double> data(static_cast<std::size_t>(t_obs) * n * 2);
  for (int step = 0; step < t_obs; ++step) {
    for (int ped = 0; ped < n; ++ped) {
      const auto& p = window.positions[static_cast<std::size_t>(ped) * t + step];
      data[(static_cast<std::size_t>(step) * n + ped) * 2] = p[0];
      data[(static_cast<std::size_t>(step) * n + ped) * 2 + 1] = p[1];
    }
  }
  return Tensor({t_obs, n, 2}, std::move(data));
}

Tensor target_displacements(const DisplacementWindow& window) {
  const int t_obs = window.t_obs, t_pred = window.t_pred, n = window.n_peds(), t = window.t_total();
  std::vector<double> data(static_cast<std::size_t>(t_pred) * n * 2);
  for (int step = 0; step < t_pred; ++step) {
    for (int ped = 0; ped < n; ++ped) {
      const auto& d = window.displacements[static_cast<std::size_t>(ped) * t + t_obs + step];
      data[(static_cast<std::size_t>(step) * n + ped) * 2] = d[0];
      data[(static_cast<std::size_t>(step) * n + ped) * 2 + 1] = d[1];
    }
  }
  return Tensor({t_pred, n, 2}, std::move(data));
}

Tensor future_positions(const SceneWindow& window) {
  const int t_pred = window.t_pred, n = window.n_peds();
  std::vector<double> data(static_cast<std::size_t>(t_pred) * n * 2);
  for (int step = 0; step < t_pred; ++step) {
    for (int ped = 0; ped < n; ++ped) {
      const auto& p = window.pos(ped, window.t_obs + step);
      data[(static_cast<std::size_t>(step) * n + ped) * 2] = p[0];
      data[(static_cast<std::size_t>(step) * n + ped) * 2 + 1] = p[1];
    }
  }
  return Tensor({t_pred, n, 2}, std::move(data));
}

Tensor model_forward(const DisplacementWindow& window, const NamedTensors& values,
                     const ModelConfig& config) {
  if (window.n_peds() < 1) {
    throw InputError("model_forward: window has no pedestrians");
  }
  if (window.t_obs != config.t_obs) {
    throw ConfigError("model_forward: window t_obs " + std::to_string(window.t_obs) +
                      " does not match model t_obs " + std::to_string(config.t_obs));
  }
  const SocialParams social = social_view(values);
  const TemporalParams temporal = temporal_view(values, config);

  const Tensor disp = observed_displacements(window);
  const Tensor pos = observed_positions(window);

  const Tensor embedded = embed_positions(disp, social.w_embed);
  const Tensor offsets = pairwise_offsets(pos);
  const Tensor weights = interaction_weights(offsets, social);
  const Tensor aggregated = aggregate_social(embedded, weights);
  const Tensor fused = fuse_features(embedded, aggregated, social);
  const Tensor temporal_features = tcn_forward(fused, temporal, config.tcn_residual);
  return extrapolate(temporal_features, temporal);
}

Tensor model_forward(const DisplacementWindow& window, const ModelParams& params, Tape* tape,
                     NamedTensors* tracked_out) {
  if (tape == nullptr) {
    return model_forward(window, params.values, params.config);
  }
  NamedTensors tracked = track_params(*tape, params.values);
  const Tensor out = model_forward(window, tracked, params.config);
  if (tracked_out != nullptr) *tracked_out = std::move(tracked);
  return out;
}

}  // namespace crowdcast
