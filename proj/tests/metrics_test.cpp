#include "crowdcast/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "crowdcast/errors.hpp"

namespace crowdcast {
namespace {

Tensor random_positions(Rng& rng, int t_pred, int n, double scale = 10.0) {
  std::vector<double> data(static_cast<std::size_t>(t_pred) * n * 2);
  for (double& v : data) v = rng.uniform(-scale, scale);
  return Tensor({t_pred, n, 2}, std::move(data));
}

TEST(Ade, ZeroForPerfectPrediction) {
  Rng rng(40);
  const Tensor gt = random_positions(rng, 12, 3);
  EXPECT_EQ(ade(gt, gt), 0.0);
  EXPECT_EQ(fde(gt, gt), 0.0);
}

TEST(Ade, ConstantOffsetIsItsNorm) {
  Rng rng(41);
  const Tensor gt = random_positions(rng, 12, 3);
  std::vector<double> shifted(gt.data());
  for (std::size_t i = 0; i < shifted.size(); i += 2) shifted[i] += 1.0;
  EXPECT_NEAR(ade(Tensor(gt.shape(), std::move(shifted)), gt), 1.0, 1e-12);
}

TEST(Fde, ThreeFourFiveTriangle) {
  Rng rng(42);
  const Tensor gt = random_positions(rng, 12, 1);
  std::vector<double> pred(gt.data());
  pred[pred.size() - 2] += 3.0;
  pred[pred.size() - 1] += 4.0;
  EXPECT_DOUBLE_EQ(fde(Tensor(gt.shape(), std::move(pred)), gt), 5.0);
}

TEST(AdeFde, MatchDoubleLoopOracle) {
  Rng rng(43);
  for (int rep = 0; rep < 100; ++rep) {
    const int t_pred = 12, n = 3;
    const Tensor pred = random_positions(rng, t_pred, n);
    const Tensor gt = random_positions(rng, t_pred, n);

    double sum = 0.0;
    for (int t = 0; t < t_pred; ++t) {
      for (int i = 0; i < n; ++i) {
        const double dx = pred.at({t, i, 0}) - gt.at({t, i, 0});
        const double dy = pred.at({t, i, 1}) - gt.at({t, i, 1});
        sum += std::sqrt(dx * dx + dy * dy);
      }
    }
    EXPECT_NEAR(ade(pred, gt), sum / (t_pred * n), 1e-12);

    double final_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double dx = pred.at({t_pred - 1, i, 0}) - gt.at({t_pred - 1, i, 0});
      const double dy = pred.at({t_pred - 1, i, 1}) - gt.at({t_pred - 1, i, 1});
      final_sum += std::sqrt(dx * dx + dy * dy);
    }
    EXPECT_NEAR(fde(pred, gt), final_sum / n, 1e-12);
  }
}

TEST(AdeFde, ShapeMismatchRejected) {
  Rng rng(44);
  EXPECT_THROW(ade(random_positions(rng, 12, 3), random_positions(rng, 12, 2)), ShapeError);
  EXPECT_THROW(fde(random_positions(rng, 10, 3), random_positions(rng, 12, 3)), ShapeError);
}

TEST(AdeFde, InvariantUnderRigidMotion) {
  Rng rng(45);
  for (int rep = 0; rep < 20; ++rep) {
    const Tensor pred = random_positions(rng, 8, 2);
    const Tensor gt = random_positions(rng, 8, 2);
    const double theta = rng.uniform(0, 2 * M_PI), tx = rng.uniform(-5, 5), ty = rng.uniform(-5, 5);
    auto transform = [&](const Tensor& x) {
      std::vector<double> out(static_cast<std::size_t>(x.size()));
      for (std::int64_t i = 0; i < x.size() / 2; ++i) {
        const double px = x.at(2 * i), py = x.at(2 * i + 1);
        out[static_cast<std::size_t>(2 * i)] = std::cos(theta) * px - std::sin(theta) * py + tx;
        out[static_cast<std::size_t>(2 * i + 1)] = std::sin(theta) * px + std::cos(theta) * py + ty;
      }
      return Tensor(x.shape(), std::move(out));
    };
    EXPECT_NEAR(ade(transform(pred), transform(gt)), ade(pred, gt), 1e-9);
    EXPECT_NEAR(fde(transform(pred), transform(gt)), fde(pred, gt), 1e-9);
  }
}

BiGaussianSeq gaussian_at(const Tensor& mean_disp, double sigma) {
  const int t_pred = mean_disp.shape()[0], n = mean_disp.shape()[1];
  BiGaussianSeq p;
  std::vector<double> mx(static_cast<std::size_t>(t_pred) * n), my(mx.size());
  for (std::size_t i = 0; i < mx.size(); ++i) {
    mx[i] = mean_disp.at(static_cast<std::int64_t>(2 * i));
    my[i] = mean_disp.at(static_cast<std::int64_t>(2 * i + 1));
  }
  p.mu_x = Tensor({t_pred, n}, std::move(mx));
  p.mu_y = Tensor({t_pred, n}, std::move(my));
  p.sigma_x = Tensor::full({t_pred, n}, sigma);
  p.sigma_y = Tensor::full({t_pred, n}, sigma);
  p.rho = Tensor::zeros({t_pred, n});
  return p;
}

TEST(BestOfN, SingleSampleEqualsItsMetrics) {
  Rng rng(46);
  const int t_pred = 6, n = 2;
  const Tensor mean_disp = random_positions(rng, t_pred, n, 0.5);
  const std::vector<std::array<double, 2>> origin(n, {0.0, 0.0});
  const Tensor gt = random_positions(rng, t_pred, n, 3.0);
  const auto p = gaussian_at(mean_disp, 0.4);

  Rng r1(99), r2(99);
  const auto best = best_of_n(p, origin, gt, 1, r1);
  const Tensor sample = displacements_to_absolute(sample_displacements(p, r2), origin);
  EXPECT_DOUBLE_EQ(best.ade, ade(sample, gt));
  EXPECT_DOUBLE_EQ(best.fde, fde(sample, gt));
  EXPECT_EQ(best.best_index, 0);
}

TEST(BestOfN, CollapsedSigmaEqualsMeanTrajectory) {
  Rng rng(47);
  const int t_pred = 6, n = 2;
  const Tensor mean_disp = random_positions(rng, t_pred, n, 0.5);
  const std::vector<std::array<double, 2>> origin(n, {1.0, -1.0});
  const Tensor gt = random_positions(rng, t_pred, n, 3.0);
  const auto p = gaussian_at(mean_disp, 1e-12);

  Rng r(5);
  const auto best = best_of_n(p, origin, gt, 20, r);
  const Tensor mean_traj = displacements_to_absolute(mean_displacements(p), origin);
  EXPECT_NEAR(best.ade, ade(mean_traj, gt), 1e-9);
  EXPECT_NEAR(best.fde, fde(mean_traj, gt), 1e-9);
}

TEST(BestOfN, MinAdeNonIncreasingInN) {
  Rng rng(48);
  const int t_pred = 5, n = 2;
  const Tensor mean_disp = random_positions(rng, t_pred, n, 0.4);
  const std::vector<std::array<double, 2>> origin(n, {0.0, 0.0});
  const Tensor gt = random_positions(rng, t_pred, n, 2.0);
  const auto p = gaussian_at(mean_disp, 0.7);

  // Nested sample sets: with a fixed seed the first N draws are a prefix of
  // the first N+1 draws, so the running minimum cannot increase.
  double prev = 1e300;
  for (int n_samples = 1; n_samples <= 20; ++n_samples) {
    Rng r(7);
    const auto best = best_of_n(p, origin, gt, n_samples, r);
    EXPECT_LE(best.ade, prev + 1e-15);
    prev = best.ade;
  }
}

TEST(BestOfN, ReproduciblePerSeed) {
  Rng rng(49);
  const auto p = gaussian_at(random_positions(rng, 6, 3, 0.5), 0.5);
  const std::vector<std::array<double, 2>> origin(3, {0.0, 0.0});
  const Tensor gt = random_positions(rng, 6, 3, 3.0);
  Rng r1(11), r2(11);
  const auto a = best_of_n(p, origin, gt, 20, r1);
  const auto b = best_of_n(p, origin, gt, 20, r2);
  EXPECT_EQ(a.ade, b.ade);
  EXPECT_EQ(a.fde, b.fde);
  EXPECT_EQ(a.best_index, b.best_index);
}

TEST(EvalReport, GroupBreakdownReconciles) {
  Rng rng(50);
  EvalReport report;
  for (int w = 0; w < 200; ++w) {
    const auto group = static_cast<DensityGroup>(rng.below(3));
    report.add_window(group, rng.uniform(0, 2), rng.uniform(0, 3), 1 + static_cast<int>(rng.below(6)),
                      12);
  }
  double weighted = 0.0;
  std::int64_t points = 0;
  for (const auto& [group, bucket] : report.by_group) {
    weighted += bucket.ade() * static_cast<double>(bucket.ade_points);
    points += bucket.ade_points;
  }
  ASSERT_EQ(points, report.overall.ade_points);
  EXPECT_NEAR(weighted / static_cast<double>(points), report.overall.ade(), 1e-9);
}

}  // namespace
}  // namespace crowdcast
