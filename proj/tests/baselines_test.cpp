#include "crowdcast/baselines.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "crowdcast/errors.hpp"
#include "crowdcast/rng.hpp"

namespace crowdcast {
namespace {

SceneWindow window_of(const std::vector<std::array<double, 2>>& positions, int n, int t_obs,
                      int t_pred) {
  SceneWindow w;
  w.t_obs = t_obs;
  w.t_pred = t_pred;
  for (int p = 0; p < n; ++p) w.track_ids.push_back(p);
  w.positions = positions;
  w.mask.assign(positions.size(), 1);
  return w;
}

// Dyadic start and slope keep every float step exact, so the linear fit and
// its extrapolation are exact too.
SceneWindow linear_window(double x0, double y0, double vx, double vy) {
  std::vector<std::array<double, 2>> pos;
  for (int t = 0; t < 20; ++t) pos.push_back({x0 + vx * t, y0 + vy * t});
  return window_of(pos, 1, 8, 12);
}

TEST(LinearRegression, ExactOnLinearData) {
  const auto w = linear_window(0.0, 0.0, 1.0, 0.5);
  const Tensor pred = linear_regression_predict(w);
  for (int k = 0; k < 12; ++k) {
    EXPECT_DOUBLE_EQ(pred.at({k, 0, 0}), 8.0 + k);
    EXPECT_DOUBLE_EQ(pred.at({k, 0, 1}), 0.5 * (8.0 + k));
  }
}

TEST(LinearRegression, StationaryGivesConstant) {
  std::vector<std::array<double, 2>> pos(20, {2.5, -1.25});
  const Tensor pred = linear_regression_predict(window_of(pos, 1, 8, 12));
  for (int k = 0; k < 12; ++k) {
    EXPECT_DOUBLE_EQ(pred.at({k, 0, 0}), 2.5);
    EXPECT_DOUBLE_EQ(pred.at({k, 0, 1}), -1.25);
  }
}

TEST(LinearRegression, MatchesNormalEquationsOracle) {
  Rng rng(60);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::array<double, 2>> pos;
    for (int t = 0; t < 20; ++t) {
      pos.push_back({0.3 * t + rng.uniform(-0.2, 0.2), -0.1 * t + rng.uniform(-0.2, 0.2)});
    }
    const auto w = window_of(pos, 1, 8, 12);
    const Tensor pred = linear_regression_predict(w);

    // Independent normal-equations fit over the observed steps.
    for (int dim = 0; dim < 2; ++dim) {
      double s_t = 0, s_x = 0, s_tt = 0, s_tx = 0;
      for (int t = 0; t < 8; ++t) {
        s_t += t;
        s_x += pos[t][dim];
        s_tt += static_cast<double>(t) * t;
        s_tx += t * pos[t][dim];
      }
      const double denom = 8.0 * s_tt - s_t * s_t;
      const double slope = (8.0 * s_tx - s_t * s_x) / denom;
      const double intercept = (s_x - slope * s_t) / 8.0;
      for (int k = 0; k < 12; ++k) {
        EXPECT_NEAR(pred.at({k, 0, dim}), intercept + slope * (8 + k), 1e-10);
      }
    }
  }
}

TEST(ConstantVelocity, RepeatsLastDisplacement) {
  const auto w = linear_window(0.0, 0.0, 1.0, 0.0);
  const Tensor pred = constant_velocity_predict(w);
  for (int k = 0; k < 12; ++k) EXPECT_DOUBLE_EQ(pred.at({k, 0, 0}), 8.0 + k);
}

TEST(ConstantVelocity, StationaryStaysPut) {
  std::vector<std::array<double, 2>> pos(20, {4.0, 4.0});
  const Tensor pred = constant_velocity_predict(window_of(pos, 1, 8, 12));
  for (std::int64_t i = 0; i < pred.size(); i += 2) EXPECT_EQ(pred.at(i), 4.0);
}

TEST(ConstantVelocity, EqualsLinearRegressionOnLinearData) {
  const auto w = linear_window(0.5, -0.25, 0.75, 0.25);
  const Tensor lr = linear_regression_predict(w);
  const Tensor cv = constant_velocity_predict(w);
  for (std::int64_t i = 0; i < lr.size(); ++i) EXPECT_DOUBLE_EQ(lr.at(i), cv.at(i));
}

TEST(StgcnnKernel, InverseDistance) {
  const Tensor pos({1, 2, 2}, {0, 0, 3, 4});
  const Tensor a = stgcnn_kernel(pos);
  EXPECT_DOUBLE_EQ(a.at({0, 0, 1}), 0.2);
  EXPECT_DOUBLE_EQ(a.at({0, 1, 0}), 0.2);
  EXPECT_DOUBLE_EQ(a.at({0, 0, 0}), 1.0);  // diagonal convention
}

TEST(StgcnnKernel, UnitDistance) {
  const Tensor a = stgcnn_kernel(Tensor({1, 2, 2}, {0, 0, 1, 0}));
  EXPECT_DOUBLE_EQ(a.at({0, 0, 1}), 1.0);
}

TEST(StgcnnKernel, CoincidentPedestriansClamped) {
  const Tensor a = stgcnn_kernel(Tensor({1, 2, 2}, {1, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(a.at({0, 0, 1}), 1e6);
}

TEST(StgcnnKernel, SymmetricExactly) {
  Rng rng(61);
  std::vector<double> pos(3 * 5 * 2);
  for (double& v : pos) v = rng.uniform(-20, 20);
  const Tensor a = stgcnn_kernel(Tensor({3, 5, 2}, std::move(pos)));
  for (int t = 0; t < 3; ++t)
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) EXPECT_EQ(a.at({t, i, j}), a.at({t, j, i}));
}

TEST(BuildGraph, ShapesAndDefinition) {
  std::vector<std::array<double, 2>> pos;
  for (int p = 0; p < 2; ++p)
    for (int t = 0; t < 20; ++t) pos.push_back({static_cast<double>(t + p), 2.0 * p});
  const auto w = window_of(pos, 2, 8, 12);
  const SpatialGraph g = build_graph(w);
  EXPECT_EQ(g.vertices.shape(), (Shape{20, 2, 2}));
  EXPECT_EQ(g.adjacency.shape(), (Shape{20, 2, 2}));

  // Adjacency is definitionally the kernel of the window positions.
  std::vector<double> flat(20 * 2 * 2);
  for (int t = 0; t < 20; ++t)
    for (int p = 0; p < 2; ++p) {
      flat[(static_cast<std::size_t>(t) * 2 + p) * 2] = w.pos(p, t)[0];
      flat[(static_cast<std::size_t>(t) * 2 + p) * 2 + 1] = w.pos(p, t)[1];
    }
  EXPECT_TRUE(g.adjacency.same_bits(stgcnn_kernel(Tensor({20, 2, 2}, std::move(flat)))));
}

TEST(BuildGraph, SinglePedestrianDegenerate) {
  std::vector<std::array<double, 2>> pos;
  for (int t = 0; t < 20; ++t) pos.push_back({static_cast<double>(t), 0.0});
  const SpatialGraph g = build_graph(window_of(pos, 1, 8, 12));
  EXPECT_EQ(g.adjacency.shape(), (Shape{20, 1, 1}));
  EXPECT_DOUBLE_EQ(g.adjacency.at(0), 1.0);
}

SceneWindow random_bench_window(Rng& rng, int n, int t) {
  std::vector<std::array<double, 2>> pos;
  for (int p = 0; p < n; ++p) {
    double x = rng.uniform(-20, 20), y = rng.uniform(-20, 20);
    for (int s = 0; s < t; ++s) {
      pos.push_back({x, y});
      x += rng.uniform(-0.5, 0.5);
      y += rng.uniform(-0.5, 0.5);
    }
  }
  return SceneWindow{std::vector<std::int64_t>(n, 0), pos,
                     std::vector<std::uint8_t>(pos.size(), 1), 8, t - 8, "bench",
                     DensityGroup::kUngrouped};
}

TEST(BenchPreprocess, SmokeReturnsFiniteStats) {
  Rng rng(62);
  const std::vector<SceneWindow> windows{random_bench_window(rng, 3, 20)};
  const BenchStats stats = bench_preprocess(windows, BenchMode::kDirect, 5);
  EXPECT_TRUE(std::isfinite(stats.median_ms));
  EXPECT_TRUE(std::isfinite(stats.p10_ms));
  EXPECT_TRUE(std::isfinite(stats.p90_ms));
  EXPECT_LE(stats.p10_ms, stats.median_ms);
  EXPECT_LE(stats.median_ms, stats.p90_ms);
}

TEST(BenchPreprocess, EmptyInputRejected) {
  EXPECT_THROW(bench_preprocess({}, BenchMode::kGraph, 5), InputError);
  Rng rng(63);
  EXPECT_THROW(bench_preprocess({random_bench_window(rng, 2, 20)}, BenchMode::kGraph, 4),
               DomainError);
}

TEST(BenchPreprocess, DirectBeatsGraphOnMediansAtModestSize) {
  Rng rng(64);
  std::vector<SceneWindow> windows;
  for (int i = 0; i < 8; ++i) windows.push_back(random_bench_window(rng, 24, 20));
  const BenchStats graph = bench_preprocess(windows, BenchMode::kGraph, 15);
  const BenchStats direct = bench_preprocess(windows, BenchMode::kDirect, 15);
  EXPECT_LT(direct.median_ms, graph.median_ms);
}

TEST(BenchPreprocess, CostScalesQuadraticallyInPedestrians) {
  Rng rng(65);
  std::vector<double> log_n, log_t;
  for (int n : {16, 32, 64, 128}) {
    std::vector<SceneWindow> windows;
    for (int i = 0; i < 4; ++i) windows.push_back(random_bench_window(rng, n, 20));
    const BenchStats stats = bench_preprocess(windows, BenchMode::kDirect, 11);
    log_n.push_back(std::log(static_cast<double>(n)));
    log_t.push_back(std::log(stats.median_ms));
  }
  // Least-squares slope of log-time vs log-n; pairwise work is O(n^2).
  const std::size_t m = log_n.size();
  double mean_n = 0, mean_t = 0;
  for (std::size_t i = 0; i < m; ++i) {
    mean_n += log_n[i];
    mean_t += log_t[i];
  }
  mean_n /= static_cast<double>(m);
  mean_t /= static_cast<double>(m);
  double cov = 0, var = 0;
  for (std::size_t i = 0; i < m; ++i) {
    cov += (log_n[i] - mean_n) * (log_t[i] - mean_t);
    var += (log_n[i] - mean_n) * (log_n[i] - mean_n);
  }
  const double slope = cov / var;
  EXPECT_NEAR(slope, 2.0, 0.4);
}

}  // namespace
}  // namespace crowdcast
