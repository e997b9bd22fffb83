#include "crowdcast/synth.hpp"

#include <cmath>

#include "crowdcast/errors.hpp"
#include "crowdcast/rng.hpp"

namespace crowdcast {

void social_force_step(std::vector<AgentState>* agents, const ForceConfig& cfg, double dt,
                       Rng* rng) {
  if (!(dt > 0.0)) throw DomainError("social_force_step: dt must be positive");
  auto& a = *agents;
  const std::size_t n = a.size();
  std::vector<std::array<double, 2>> accel(n, {0.0, 0.0});

  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(a[i].position[0]) || !std::isfinite(a[i].position[1]) ||
        !std::isfinite(a[i].velocity[0]) || !std::isfinite(a[i].velocity[1])) {
      throw NumericsError("social_force_step: non-finite agent state");
    }
    // Goal attraction: relax toward desired velocity; arrived agents relax
    // toward rest, so an agent at its goal with zero velocity stays put.
    const double gx = a[i].goal[0] - a[i].position[0];
    const double gy = a[i].goal[1] - a[i].position[1];
    const double dist_goal = std::sqrt(gx * gx + gy * gy);
    double want_x = 0.0, want_y = 0.0;
    if (dist_goal > cfg.goal_radius) {
      want_x = cfg.desired_speed * gx / dist_goal;
      want_y = cfg.desired_speed * gy / dist_goal;
    }
    accel[i][0] = (want_x - a[i].velocity[0]) / cfg.relaxation_time;
    accel[i][1] = (want_y - a[i].velocity[1]) / cfg.relaxation_time;
    if (rng != nullptr && cfg.fluctuation > 0.0) {
      accel[i][0] += cfg.fluctuation * rng->normal();
      accel[i][1] += cfg.fluctuation * rng->normal();
    }

    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = a[i].position[0] - a[j].position[0];
      const double dy = a[i].position[1] - a[j].position[1];
      const double dist = std::sqrt(dx * dx + dy * dy);
      if (dist < 1e-9) continue;  // coincident, no direction
      const double mag = cfg.repulsion_strength * std::exp(-dist / cfg.repulsion_range);
      accel[i][0] += mag * dx / dist;
      accel[i][1] += mag * dy / dist;
    }
  }

  const double cap = cfg.speed_cap_factor * cfg.desired_speed;
  for (std::size_t i = 0; i < n; ++i) {
    a[i].velocity[0] += dt * accel[i][0];
    a[i].velocity[1] += dt * accel[i][1];
    const double speed = std::sqrt(a[i].velocity[0] * a[i].velocity[0] +
                                   a[i].velocity[1] * a[i].velocity[1]);
    if (speed > cap) {
      a[i].velocity[0] *= cap / speed;
      a[i].velocity[1] *= cap / speed;
    }
    a[i].position[0] += dt * a[i].velocity[0];
    a[i].position[1] += dt * a[i].velocity[1];
  }
}

SceneTemplate parse_template(const std::string& name) {
  if (name == "parallel") return SceneTemplate::kParallel;
  if (name == "merge") return SceneTemplate::kMerge;
  if (name == "crossing") return SceneTemplate::kCrossing;
  if (name == "group-meet") return SceneTemplate::kGroupMeet;
  if (name == "dense-crowd") return SceneTemplate::kDenseCrowd;
  throw ConfigError("unknown scene template '" + name +
                    "' (expected parallel|merge|crossing|group-meet|dense-crowd)");
}

const char* template_name(SceneTemplate t) {
  switch (t) {
    case SceneTemplate::kParallel: return "parallel";
    case SceneTemplate::kMerge: return "merge";
    case SceneTemplate::kCrossing: return "crossing";
    case SceneTemplate::kGroupMeet: return "group-meet";
    case SceneTemplate::kDenseCrowd: return "dense-crowd";
  }
  return "?";
}

namespace {

std::vector<AgentState> spawn_agents(SceneTemplate tmpl, int n, Rng& rng) {
  std::vector<AgentState> agents(static_cast<std::size_t>(n));
  auto jitter = [&](double scale) { return rng.uniform(-scale, scale); };
  const double walk = 18.0;  // meters covered by a straight walk

  switch (tmpl) {
    case SceneTemplate::kParallel:
      // Side by side, same direction, one lane per agent.
      for (int i = 0; i < n; ++i) {
        const double lane = (i - 0.5 * (n - 1)) * 2.5;
        agents[i].position = {jitter(0.3), lane + jitter(0.1)};
        agents[i].goal = {walk + jitter(0.5), lane + jitter(0.1)};
      }
      break;
    case SceneTemplate::kMerge:
      // Angled lanes converging onto a shared corridor.
      for (int i = 0; i < n; ++i) {
        const double side = i % 2 == 0 ? 1.0 : -1.0;
        agents[i].position = {jitter(0.4) - 0.5 * i, side * (2.0 + 0.5 * i) + jitter(0.2)};
        agents[i].goal = {walk + jitter(0.5), side * 0.25 + jitter(0.1)};
      }
      break;
    case SceneTemplate::kCrossing:
      // Two streams on perpendicular paths through the origin. Small lateral
      // jitter breaks the head-on symmetry so streams swerve rather than
      // stall.
      for (int i = 0; i < n; ++i) {
        const double off = 0.4 * (i / 2) + jitter(0.25);
        if (i % 2 == 0) {
          agents[i].position = {-0.5 * walk + jitter(0.5), off};
          agents[i].goal = {0.5 * walk, off + jitter(0.25)};
        } else {
          agents[i].position = {off, -0.5 * walk + jitter(0.5)};
          agents[i].goal = {off + jitter(0.25), 0.5 * walk};
        }
      }
      break;
    case SceneTemplate::kGroupMeet:
      // One individual walking against a group coming the other way.
      agents[0].position = {0.5 * walk + jitter(0.3), jitter(0.2)};
      agents[0].goal = {-0.5 * walk, jitter(0.3)};
      for (int i = 1; i < n; ++i) {
        const double lane = ((i - 1) - 0.5 * (n - 2)) * 0.8;
        agents[i].position = {-0.5 * walk + jitter(0.3), lane + jitter(0.1)};
        agents[i].goal = {0.5 * walk, lane + jitter(0.2)};
      }
      break;
    case SceneTemplate::kDenseCrowd: {
      // Random starts and goals across a square plaza.
      const double half = std::max(4.0, 0.8 * std::sqrt(static_cast<double>(n)) * 2.0);
      for (int i = 0; i < n; ++i) {
        agents[i].position = {rng.uniform(-half, half), rng.uniform(-half, half)};
        agents[i].goal = {rng.uniform(-half, half), rng.uniform(-half, half)};
      }
      break;
    }
  }
  return agents;
}

}  // namespace

TrajectoryDataset generate_scene(SceneTemplate tmpl, int n_agents, std::uint64_t seed,
                                 int output_steps, const ForceConfig& config) {
  if (n_agents < 1) throw DomainError("generate_scene: n_agents must be >= 1");
  if (output_steps < 1) throw DomainError("generate_scene: output_steps must be >= 1");
  if (!(config.dt > 0.0) || config.dt > 0.4) {
    throw DomainError("generate_scene: dt must be in (0, 0.4]");
  }

  Rng rng(seed);
  std::vector<AgentState> agents = spawn_agents(tmpl, n_agents, rng);

  // 2.5 Hz output from finer internal integration.
  const int substeps = std::max(1, static_cast<int>(std::lround(0.4 / config.dt)));

  TrajectoryDataset ds;
  ds.frame_rate = 2.5;
  ds.scene_id = std::string(template_name(tmpl)) + "-" + std::to_string(seed);
  for (int frame = 0; frame < output_steps; ++frame) {
    for (int i = 0; i < n_agents; ++i) {
      ds.records.push_back({frame, i, agents[static_cast<std::size_t>(i)].position[0],
                            agents[static_cast<std::size_t>(i)].position[1]});
    }
    if (frame + 1 < output_steps) {
      for (int s = 0; s < substeps; ++s) social_force_step(&agents, config, config.dt, &rng);
    }
  }
  return ds;
}

}  // namespace crowdcast
