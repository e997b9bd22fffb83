#pragma once

#include <vector>

#include "crowdcast/dataio.hpp"
#include "crowdcast/tensor.hpp"

namespace crowdcast {

// Per pedestrian and per dimension, ordinary least squares of position
// against the time index over the observed steps, extrapolated over the
// prediction horizon. Returns absolute positions [t_pred, n, 2].
Tensor linear_regression_predict(const SceneWindow& window);

// Repeats the last observed displacement for every prediction step.
Tensor constant_velocity_predict(const SceneWindow& window);

// The rival hand-crafted adjacency: inverse Euclidean distance per pair of
// pedestrians, a[t][i][j] = 1/dist. Coincident pedestrians are clamped at
// 1/eps with eps = 1e-6 and the diagonal is fixed at 1 by convention.
// positions: [T, n, 2] -> [T, n, n], symmetric.
Tensor stgcnn_kernel(const Tensor& positions);

// Spatial graph built the way the compared method does: per-step vertex
// values copied from the already-computed relative locations, edges from
// the inverse-distance kernel. Exists as the benchmark rival path.
struct SpatialGraph {
  Tensor vertices;   // [T, n, 2], relative locations
  Tensor adjacency;  // [T, n, n]
};

SpatialGraph build_graph(const SceneWindow& window);

enum class BenchMode { kGraph, kDirect };

struct BenchStats {
  double median_ms = 0.0;  // per-sequence preprocessing time
  double p10_ms = 0.0;
  double p90_ms = 0.0;
  int repeats = 0;
};

// Times the per-sequence preprocessing cost of one mode over identical
// inputs: kGraph runs vertex copy + inverse-distance kernel, kDirect runs
// the pairwise-offset path. Wall clock, single-threaded, warm-up runs
// discarded, scratch buffers reused so allocation stays out of the
// measurement.
BenchStats bench_preprocess(const std::vector<SceneWindow>& windows, BenchMode mode, int repeats);

}  // namespace crowdcast
