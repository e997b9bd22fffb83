#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "crowdcast/dataio.hpp"
#include "crowdcast/rng.hpp"

namespace crowdcast {

// Social-force dynamics: goal attraction with relaxation plus isotropic
// exponential repulsion between agents. No wall forces.
struct ForceConfig {
  double desired_speed = 1.34;      // m/s
  double relaxation_time = 0.5;     // s
  double repulsion_strength = 2.5;  // m/s^2 at zero separation
  double repulsion_range = 0.8;     // m
  double goal_radius = 0.05;        // m, inside counts as arrived
  double speed_cap_factor = 1.3;
  double dt = 0.04;                 // internal step, decimated x10 to 2.5 Hz
  double fluctuation = 0.25;        // m/s^2 std of the random fluctuation force
};

struct AgentState {
  std::array<double, 2> position{};
  std::array<double, 2> velocity{};
  std::array<double, 2> goal{};
};

// One integration step: v += dt * (goal attraction + pairwise repulsion
// + fluctuation), speed capped at speed_cap_factor * desired_speed, then
// x += dt * v. Without an rng the fluctuation term is dropped and the step
// is fully deterministic.
void social_force_step(std::vector<AgentState>* agents, const ForceConfig& config, double dt,
                       Rng* rng = nullptr);

enum class SceneTemplate { kParallel, kMerge, kCrossing, kGroupMeet, kDenseCrowd };

// Accepts the CLI spellings parallel|merge|crossing|group-meet|dense-crowd.
SceneTemplate parse_template(const std::string& name);
const char* template_name(SceneTemplate t);

// Rolls out one scene at 2.5 Hz (internal integration at 25 Hz) and returns
// it in the 4-column dataset form. Deterministic per seed; every agent is
// present at every output frame.
TrajectoryDataset generate_scene(SceneTemplate tmpl, int n_agents, std::uint64_t seed,
                                 int output_steps = 30, const ForceConfig& config = {});

}  // namespace crowdcast
