#include "crowdcast/metrics.hpp"

#include <cmath>

#include "crowdcast/errors.hpp"

namespace crowdcast {

namespace {

void check_shapes(const char* op, const Tensor& pred, const Tensor& gt) {
  if (pred.shape() != gt.shape() || pred.rank() != 3 || pred.shape()[2] != 2) {
    throw ShapeError(std::string(op) + ": prediction " + shape_str(pred.shape()) +
                     " does not match ground truth " + shape_str(gt.shape()));
  }
}

double distance_at(const Tensor& pred, const Tensor& gt, std::int64_t point) {
  const double dx = pred.at(2 * point) - gt.at(2 * point);
  const double dy = pred.at(2 * point + 1) - gt.at(2 * point + 1);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

double ade(const Tensor& pred, const Tensor& gt) {
  check_shapes("ade", pred, gt);
  const std::int64_t points = pred.size() / 2;
  double sum = 0.0;
  for (std::int64_t i = 0; i < points; ++i) sum += distance_at(pred, gt, i);
  return sum / static_cast<double>(points);
}

double fde(const Tensor& pred, const Tensor& gt) {
  check_shapes("fde", pred, gt);
  const std::int64_t t_pred = pred.shape()[0], n = pred.shape()[1];
  double sum = 0.0;
  for (std::int64_t ped = 0; ped < n; ++ped) {
    sum += distance_at(pred, gt, (t_pred - 1) * n + ped);
  }
  return sum / static_cast<double>(n);
}

BestOfN best_of_n(const BiGaussianSeq& dist, const std::vector<std::array<double, 2>>& origin,
                  const Tensor& gt_positions, int n_samples, Rng& rng) {
  if (n_samples < 1) throw DomainError("best_of_n: need at least one sample");
  BestOfN best;
  for (int k = 0; k < n_samples; ++k) {
    const Tensor trajectory =
        displacements_to_absolute(sample_displacements(dist, rng), origin);
    const double sample_ade = ade(trajectory, gt_positions);
    const double sample_fde = fde(trajectory, gt_positions);
    if (k == 0 || sample_ade < best.ade) {
      best.ade = sample_ade;
      best.fde = sample_fde;
      best.best_index = k;
    }
    if (k == 0 || sample_fde < best.min_fde) best.min_fde = sample_fde;
  }
  return best;
}

void EvalReport::add_window(DensityGroup group, double window_ade, double window_fde, int n_peds,
                            int t_pred) {
  const std::int64_t ade_points = static_cast<std::int64_t>(n_peds) * t_pred;
  for (MetricBucket* bucket : {&overall, &by_group[group]}) {
    bucket->ade_dist_sum += window_ade * static_cast<double>(ade_points);
    bucket->ade_points += ade_points;
    bucket->fde_dist_sum += window_fde * static_cast<double>(n_peds);
    bucket->fde_points += n_peds;
    bucket->n_windows += 1;
    bucket->n_pedestrians += n_peds;
  }
}

}  // namespace crowdcast
