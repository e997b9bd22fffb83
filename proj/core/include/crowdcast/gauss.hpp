#pragma once

#include <array>
#include <string>
#include <vector>

#include "crowdcast/rng.hpp"
#include "crowdcast/tensor.hpp"

namespace crowdcast {

// Bivariate Gaussian parameters per pedestrian per prediction step, each
// component a [t_pred, n] tensor. Construction through decode_params
// guarantees sigma > 0 and |rho| < 1.
struct BiGaussianSeq {
  Tensor mu_x, mu_y;        // displacement-space means, meters
  Tensor sigma_x, sigma_y;  // standard deviations, > 0
  Tensor rho;               // correlation, in (-1, 1)

  int t_pred() const { return mu_x.shape()[0]; }
  int n_peds() const { return mu_x.shape()[1]; }
};

// Splits the raw network output [t_pred, n, 5] into distribution
// parameters: mu = channels 0-1, sigma = exp(channels 2-3) floored at 1e-6,
// rho = tanh(channel 4) clamped strictly inside (-1, 1). Stays on the tape
// of `raw`, so the loss can differentiate through it.
BiGaussianSeq decode_params(const Tensor& raw);

struct NllResult {
  Tensor sum;   // Eq.-style double sum over steps and pedestrians
  Tensor mean;  // per-point mean, used as the training objective
  std::int64_t count = 0;
};

// Negative log likelihood of displacement-space targets [t_pred, n, 2]
// under the predicted bivariate Gaussians.
NllResult nll(const BiGaussianSeq& params, const Tensor& targets);

// One trajectory sample: per pedestrian per step, two standard normal draws
// through the Cholesky factor of the covariance. Deterministic per rng
// state; returns [t_pred, n, 2].
Tensor sample_displacements(const BiGaussianSeq& params, Rng& rng);

// Mean trajectory (mu channels only), [t_pred, n, 2].
Tensor mean_displacements(const BiGaussianSeq& params);

// position[t] = origin + running sum of displacements, [t_pred, n, 2].
Tensor displacements_to_absolute(const Tensor& disp_pred,
                                 const std::vector<std::array<double, 2>>& origin);

// CSV rows `window_id, track_id, step, mu_x, mu_y, sigma_x, sigma_y, rho`
// appended to `out` (no header).
void append_distribution_csv(std::string* out, const BiGaussianSeq& params,
                             const std::vector<std::int64_t>& track_ids, int window_id);

}  // namespace crowdcast
