#pragma once

#include <array>
#include <map>
#include <vector>

#include "crowdcast/dataio.hpp"
#include "crowdcast/gauss.hpp"
#include "crowdcast/rng.hpp"
#include "crowdcast/tensor.hpp"

namespace crowdcast {

// Average displacement error: mean Euclidean distance over all pedestrians
// and all prediction steps. Both tensors are [t_pred, n, 2] absolute
// positions.
double ade(const Tensor& pred, const Tensor& gt);

// Final displacement error: mean Euclidean distance at the last prediction
// step only.
double fde(const Tensor& pred, const Tensor& gt);

struct BestOfN {
  double ade = 0.0;      // ADE of the selected sample
  double fde = 0.0;      // FDE of the same sample
  double min_fde = 0.0;  // minimum FDE over all samples (per-metric selection)
  int best_index = 0;    // ties go to the lowest sample index
};

// Draws n_samples trajectories from the predicted distribution, converts
// each to absolute positions from `origin`, and selects the sample with the
// lowest ADE against the ground truth.
BestOfN best_of_n(const BiGaussianSeq& dist, const std::vector<std::array<double, 2>>& origin,
                  const Tensor& gt_positions, int n_samples, Rng& rng);

struct MetricBucket {
  double ade_dist_sum = 0.0;
  double fde_dist_sum = 0.0;
  std::int64_t ade_points = 0;
  std::int64_t fde_points = 0;
  std::int64_t n_windows = 0;
  std::int64_t n_pedestrians = 0;

  double ade() const { return ade_points ? ade_dist_sum / static_cast<double>(ade_points) : 0.0; }
  double fde() const { return fde_points ? fde_dist_sum / static_cast<double>(fde_points) : 0.0; }
};

// Aggregated evaluation with per-density-group breakdown. Group buckets
// partition the overall bucket, so the point-weighted mean of group ADEs
// reconciles with the whole-set ADE.
struct EvalReport {
  MetricBucket overall;
  std::map<DensityGroup, MetricBucket> by_group;
  int samples_per_window = 1;

  void add_window(DensityGroup group, double window_ade, double window_fde, int n_peds, int t_pred);
};

}  // namespace crowdcast
