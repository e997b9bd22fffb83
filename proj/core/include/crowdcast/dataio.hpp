#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace crowdcast {

struct TrajectoryRecord {
  std::int64_t frame_id = 0;
  std::int64_t track_id = 0;
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

// Per-frame pedestrian observations, sorted by (frame_id, track_id) with
// unique pairs.
struct TrajectoryDataset {
  std::vector<TrajectoryRecord> records;
  double frame_rate = 2.5;
  std::string scene_id;

  std::size_t num_tracks() const;
  std::vector<std::int64_t> frame_ids() const;  // sorted, unique
  // Average number of pedestrians per frame; 0 for an empty dataset.
  double avg_peds_per_frame() const;
};

struct EgoPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, in (-pi, pi]
};

// Ego-vehicle pose per frame in the record-start frame of reference.
struct EgoPoseTrack {
  std::map<std::int64_t, EgoPose> poses;
};

enum class DensityGroup { kGroup1, kGroup2, kGroup3, kUngrouped };

const char* density_group_name(DensityGroup g);

// Test-set density grouping by average pedestrians per frame. The source
// table leaves the ranges [15,18] and [62,71] unassigned; those map to
// kUngrouped rather than to an invented nearest group.
DensityGroup density_group(double avg_peds_per_frame);

// Fixed-length slice of co-present pedestrians. Only pedestrians present at
// every one of the T = T_obs + T_pred steps are included, so the presence
// mask is all-true for every included pedestrian.
struct SceneWindow {
  std::vector<std::int64_t> track_ids;           // size n
  std::vector<std::array<double, 2>> positions;  // n * T, ped-major
  std::vector<std::uint8_t> mask;                // n * T presence flags
  int t_obs = 0;
  int t_pred = 0;
  std::string scene_id;
  DensityGroup group = DensityGroup::kUngrouped;

  int n_peds() const { return static_cast<int>(track_ids.size()); }
  int t_total() const { return t_obs + t_pred; }
  const std::array<double, 2>& pos(int ped, int step) const {
    return positions[static_cast<std::size_t>(ped) * t_total() + step];
  }
};

// Per-step motion deltas (first step zero) plus what the model and the
// inverse transform need: the per-step absolute positions that feed the
// interaction-weight branch and the last observed position per pedestrian.
struct DisplacementWindow {
  std::vector<std::array<double, 2>> displacements;  // n * T, ped-major
  std::vector<std::array<double, 2>> positions;      // n * T, ped-major
  std::vector<std::array<double, 2>> origin;         // n, position at step t_obs-1
  std::vector<std::int64_t> track_ids;
  int t_obs = 0;
  int t_pred = 0;

  int n_peds() const { return static_cast<int>(track_ids.size()); }
  int t_total() const { return t_obs + t_pred; }
};

// Parses the 4-column text format `frame_id track_id x y` (whitespace or
// tab delimited, `#` comments skipped). Records come back sorted; malformed
// rows raise ParseError with the line number and repeated (frame, track)
// pairs raise DuplicateError.
TrajectoryDataset load_trajectories(const std::string& path);
TrajectoryDataset parse_trajectories(const std::string& text, const std::string& origin_name);

void save_trajectories(const TrajectoryDataset& dataset, const std::string& path);

// Parses the ego pose format `frame_id x y heading`.
EgoPoseTrack load_ego_poses(const std::string& path);
EgoPoseTrack parse_ego_poses(const std::string& text, const std::string& origin_name);

// Rotates each record by the ego heading of its frame and translates by the
// ego position; the identity pose leaves records unchanged. Frames without
// a pose raise MissingPoseError.
TrajectoryDataset to_global(const TrajectoryDataset& dataset, const EgoPoseTrack& ego);

// Keeps every k-th frame of the sorted frame sequence (k >= 1); used to
// bring 10 Hz sources down to 2.5 Hz with k = 4.
TrajectoryDataset downsample(const TrajectoryDataset& dataset, int keep_every);

// Cuts fixed-length windows at the given stride over the sorted frame
// sequence. A window is emitted for every start offset where at least one
// pedestrian is present at all T consecutive frames; partially present
// pedestrians are dropped from that window.
std::vector<SceneWindow> make_windows(const TrajectoryDataset& dataset, int t_obs, int t_pred,
                                      int stride);

// Observation-only windows (length t_obs) for inference on files that have
// no future frames to compare against.
std::vector<SceneWindow> make_observation_windows(const TrajectoryDataset& dataset, int t_obs,
                                                  int stride);

// displacement[t] = position[t] - position[t-1], displacement[0] = 0;
// origin is the last observed position. Reconstructing positions from the
// running sum of displacements recovers the input exactly.
DisplacementWindow to_displacements(const SceneWindow& window);

}  // namespace crowdcast
