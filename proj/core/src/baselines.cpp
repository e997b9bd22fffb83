#include "crowdcast/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "crowdcast/errors.hpp"

namespace crowdcast {

namespace {

constexpr double kCoincidentEps = 1e-6;

void check_window(const char* op, const SceneWindow& w) {
  if (w.t_obs < 2) throw DomainError(std::string(op) + ": needs t_obs >= 2");
  if (w.n_peds() < 1) throw InputError(std::string(op) + ": empty window");
}

}  // namespace

Tensor linear_regression_predict(const SceneWindow& window) {
  check_window("linear_regression_predict", window);
  const int n = window.n_peds(), t_obs = window.t_obs, t_pred = window.t_pred;
  std::vector<double> out(static_cast<std::size_t>(t_pred) * n * 2);
  const double mean_t = 0.5 * (t_obs - 1);
  double var_t = 0.0;
  for (int t = 0; t < t_obs; ++t) var_t += (t - mean_t) * (t - mean_t);
  for (int ped = 0; ped < n; ++ped) {
    for (int dim = 0; dim < 2; ++dim) {
      double mean_x = 0.0;
      for (int t = 0; t < t_obs; ++t) mean_x += window.pos(ped, t)[dim];
      mean_x /= t_obs;
      double cov = 0.0;
      for (int t = 0; t < t_obs; ++t) cov += (t - mean_t) * (window.pos(ped, t)[dim] - mean_x);
      const double slope = cov / var_t;
      const double intercept = mean_x - slope * mean_t;
      for (int k = 0; k < t_pred; ++k) {
        out[(static_cast<std::size_t>(k) * n + ped) * 2 + dim] = intercept + slope * (t_obs + k);
      }
    }
  }
  return Tensor({t_pred, n, 2}, std::move(out));
}

Tensor constant_velocity_predict(const SceneWindow& window) {
  check_window("constant_velocity_predict", window);
  const int n = window.n_peds(), t_obs = window.t_obs, t_pred = window.t_pred;
  std::vector<double> out(static_cast<std::size_t>(t_pred) * n * 2);
  for (int ped = 0; ped < n; ++ped) {
    const auto& last = window.pos(ped, t_obs - 1);
    const auto& prev = window.pos(ped, t_obs - 2);
    const double vx = last[0] - prev[0], vy = last[1] - prev[1];
    for (int k = 0; k < t_pred; ++k) {
      out[(static_cast<std::size_t>(k) * n + ped) * 2] = last[0] + (k + 1) * vx;
      out[(static_cast<std::size_t>(k) * n + ped) * 2 + 1] = last[1] + (k + 1) * vy;
    }
  }
  return Tensor({t_pred, n, 2}, std::move(out));
}

namespace {

// Kernel loops shared by the tensor op and the benchmark (which writes into
// reused scratch). Every ordered pair is computed the way the compared
// implementation does it; the squares and the square root land twice per
// unordered pair, and symmetry still holds exactly because both orders see
// the same squared terms.
void kernel_into(const double* pos, int t_n, int n, double* adjacency) {
  for (int t = 0; t < t_n; ++t) {
    const double* p = pos + static_cast<std::size_t>(t) * n * 2;
    double* a = adjacency + static_cast<std::size_t>(t) * n * n;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) {
          a[static_cast<std::size_t>(i) * n + i] = 1.0;
          continue;
        }
        const double dx = p[2 * i] - p[2 * j];
        const double dy = p[2 * i + 1] - p[2 * j + 1];
        const double dist = std::sqrt(dx * dx + dy * dy);
        a[static_cast<std::size_t>(i) * n + j] = 1.0 / std::max(dist, kCoincidentEps);
      }
    }
  }
}

void offsets_into(const double* pos, int t_n, int n, double* offsets) {
  for (int t = 0; t < t_n; ++t) {
    const double* p = pos + static_cast<std::size_t>(t) * n * 2;
    double* d = offsets + static_cast<std::size_t>(t) * n * n * 2;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        d[(static_cast<std::size_t>(i) * n + j) * 2] = p[2 * j] - p[2 * i];
        d[(static_cast<std::size_t>(i) * n + j) * 2 + 1] = p[2 * j + 1] - p[2 * i + 1];
      }
    }
  }
}

// Time-major [T, n, 2] copies of a window's positions and displacements.
struct BenchInput {
  std::vector<double> positions;
  std::vector<double> displacements;
  int t_n = 0;
  int n = 0;
};

BenchInput prepare_input(const SceneWindow& w) {
  BenchInput in;
  in.t_n = w.t_total();
  in.n = w.n_peds();
  in.positions.resize(static_cast<std::size_t>(in.t_n) * in.n * 2);
  in.displacements.resize(in.positions.size());
  for (int t = 0; t < in.t_n; ++t) {
    for (int ped = 0; ped < in.n; ++ped) {
      const auto& p = w.pos(ped, t);
      const std::size_t at = (static_cast<std::size_t>(t) * in.n + ped) * 2;
      in.positions[at] = p[0];
      in.positions[at + 1] = p[1];
      const auto& prev = w.pos(ped, t > 0 ? t - 1 : 0);
      in.displacements[at] = p[0] - prev[0];
      in.displacements[at + 1] = p[1] - prev[1];
    }
  }
  return in;
}

void do_not_optimize(double v) { asm volatile("" : : "r,m"(v) : "memory"); }

}  // namespace

Tensor stgcnn_kernel(const Tensor& positions) {
  const Shape& s = positions.shape();
  if (s.size() != 3 || s[2] != 2) {
    throw ShapeError("stgcnn_kernel: expected [T,n,2], got " + shape_str(s));
  }
  std::vector<double> a(static_cast<std::size_t>(s[0]) * s[1] * s[1]);
  kernel_into(positions.data().data(), s[0], s[1], a.data());
  return Tensor({s[0], s[1], s[1]}, std::move(a));
}

SpatialGraph build_graph(const SceneWindow& window) {
  check_window("build_graph", window);
  const BenchInput in = prepare_input(window);
  SpatialGraph g;
  g.vertices = Tensor({in.t_n, in.n, 2}, in.displacements);
  std::vector<double> a(static_cast<std::size_t>(in.t_n) * in.n * in.n);
  kernel_into(in.positions.data(), in.t_n, in.n, a.data());
  g.adjacency = Tensor({in.t_n, in.n, in.n}, std::move(a));
  return g;
}

BenchStats bench_preprocess(const std::vector<SceneWindow>& windows, BenchMode mode, int repeats) {
  if (windows.empty()) throw InputError("bench_preprocess: no windows");
  if (repeats < 5) throw DomainError("bench_preprocess: repeats must be >= 5");

  std::vector<BenchInput> inputs;
  inputs.reserve(windows.size());
  std::size_t max_graph = 0, max_offsets = 0;
  for (const auto& w : windows) {
    inputs.push_back(prepare_input(w));
    const auto& in = inputs.back();
    max_graph = std::max(max_graph, static_cast<std::size_t>(in.t_n) * in.n * in.n);
    max_offsets = std::max(max_offsets, static_cast<std::size_t>(in.t_n) * in.n * in.n * 2);
  }
  std::vector<double> adjacency(max_graph), vertices, offsets(max_offsets);
  std::size_t max_vertices = 0;
  for (const auto& in : inputs) {
    max_vertices = std::max(max_vertices, in.positions.size());
  }
  vertices.resize(max_vertices);

  auto run_once = [&] {
    double sink = 0.0;
    for (const auto& in : inputs) {
      if (mode == BenchMode::kGraph) {
        std::copy(in.displacements.begin(), in.displacements.end(), vertices.begin());
        kernel_into(in.positions.data(), in.t_n, in.n, adjacency.data());
        sink += vertices[0] + adjacency[static_cast<std::size_t>(in.t_n) * in.n * in.n - 1];
      } else {
        offsets_into(in.positions.data(), in.t_n, in.n, offsets.data());
        sink += offsets[1] + offsets[static_cast<std::size_t>(in.t_n) * in.n * in.n * 2 - 1];
      }
    }
    do_not_optimize(sink);
  };

  for (int i = 0; i < 3; ++i) run_once();  // warm-up, discarded

  std::vector<double> per_sequence_ms;
  per_sequence_ms.reserve(static_cast<std::size_t>(repeats));
  for (int r = 0; r < repeats; ++r) {
    const auto begin = std::chrono::steady_clock::now();
    run_once();
    const auto end = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(end - begin).count();
    per_sequence_ms.push_back(ms / static_cast<double>(windows.size()));
  }
  std::sort(per_sequence_ms.begin(), per_sequence_ms.end());
  auto percentile = [&](double q) {
    const double pos = q * static_cast<double>(per_sequence_ms.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, per_sequence_ms.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return per_sequence_ms[lo] * (1.0 - frac) + per_sequence_ms[hi] * frac;
  };
  return BenchStats{percentile(0.5), percentile(0.1), percentile(0.9), repeats};
}

}  // namespace crowdcast
