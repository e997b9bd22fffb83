#include "crowdcast/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "crowdcast/errors.hpp"

namespace crowdcast {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool parse_fields(const std::string& line, std::vector<double>* out) {
  out->clear();
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      return false;
    }
    if (used != tok.size()) return false;
    out->push_back(v);
  }
  return true;
}

bool integral(double v) { return std::isfinite(v) && v == std::floor(v); }

// Strips a trailing comment and reports whether anything is left.
bool strip_comment(std::string* line) {
  const auto hash = line->find('#');
  if (hash != std::string::npos) line->erase(hash);
  return line->find_first_not_of(" \t\r\n") != std::string::npos;
}

}  // namespace

std::size_t TrajectoryDataset::num_tracks() const {
  std::set<std::int64_t> tracks;
  for (const auto& r : records) tracks.insert(r.track_id);
  return tracks.size();
}

std::vector<std::int64_t> TrajectoryDataset::frame_ids() const {
  std::set<std::int64_t> frames;
  for (const auto& r : records) frames.insert(r.frame_id);
  return {frames.begin(), frames.end()};
}

double TrajectoryDataset::avg_peds_per_frame() const {
  if (records.empty()) return 0.0;
  return static_cast<double>(records.size()) / static_cast<double>(frame_ids().size());
}

const char* density_group_name(DensityGroup g) {
  switch (g) {
    case DensityGroup::kGroup1: return "group1";
    case DensityGroup::kGroup2: return "group2";
    case DensityGroup::kGroup3: return "group3";
    case DensityGroup::kUngrouped: return "ungrouped";
  }
  return "?";
}

DensityGroup density_group(double avg) {
  if (avg < 0.0) throw DomainError("density_group: negative pedestrian count");
  if (avg < 15.0) return DensityGroup::kGroup1;
  if (avg > 18.0 && avg < 62.0) return DensityGroup::kGroup2;
  if (avg > 71.0) return DensityGroup::kGroup3;
  return DensityGroup::kUngrouped;
}

TrajectoryDataset parse_trajectories(const std::string& text, const std::string& origin_name) {
  TrajectoryDataset ds;
  ds.scene_id = origin_name;
  std::istringstream in(text);
  std::string line;
  std::vector<double> fields;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!strip_comment(&line)) continue;
    if (!parse_fields(line, &fields) || fields.size() != 4 || !integral(fields[0]) ||
        !integral(fields[1]) || !std::isfinite(fields[2]) || !std::isfinite(fields[3])) {
      throw ParseError(origin_name + ": line " + std::to_string(line_no) +
                       ": expected `frame_id track_id x y`");
    }
    ds.records.push_back({static_cast<std::int64_t>(fields[0]), static_cast<std::int64_t>(fields[1]),
                          fields[2], fields[3]});
  }
  std::sort(ds.records.begin(), ds.records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.frame_id, a.track_id) < std::tie(b.frame_id, b.track_id);
  });
  for (std::size_t i = 1; i < ds.records.size(); ++i) {
    if (ds.records[i].frame_id == ds.records[i - 1].frame_id &&
        ds.records[i].track_id == ds.records[i - 1].track_id) {
      throw DuplicateError(origin_name + ": duplicate record for frame " +
                           std::to_string(ds.records[i].frame_id) + ", track " +
                           std::to_string(ds.records[i].track_id));
    }
  }
  return ds;
}

TrajectoryDataset load_trajectories(const std::string& path) {
  return parse_trajectories(read_file(path), path);
}

void save_trajectories(const TrajectoryDataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  char buf[128];
  for (const auto& r : dataset.records) {
    std::snprintf(buf, sizeof(buf), "%lld %lld %.17g %.17g\n", static_cast<long long>(r.frame_id),
                  static_cast<long long>(r.track_id), r.x, r.y);
    out << buf;
  }
}

EgoPoseTrack parse_ego_poses(const std::string& text, const std::string& origin_name) {
  EgoPoseTrack track;
  std::istringstream in(text);
  std::string line;
  std::vector<double> fields;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!strip_comment(&line)) continue;
    if (!parse_fields(line, &fields) || fields.size() != 4 || !integral(fields[0])) {
      throw ParseError(origin_name + ": line " + std::to_string(line_no) +
                       ": expected `frame_id x y heading`");
    }
    const auto frame = static_cast<std::int64_t>(fields[0]);
    if (track.poses.count(frame)) {
      throw DuplicateError(origin_name + ": duplicate ego pose for frame " + std::to_string(frame));
    }
    track.poses[frame] = EgoPose{fields[1], fields[2], fields[3]};
  }
  return track;
}

EgoPoseTrack load_ego_poses(const std::string& path) {
  return parse_ego_poses(read_file(path), path);
}

TrajectoryDataset to_global(const TrajectoryDataset& dataset, const EgoPoseTrack& ego) {
  TrajectoryDataset out = dataset;
  for (auto& r : out.records) {
    const auto it = ego.poses.find(r.frame_id);
    if (it == ego.poses.end()) {
      throw MissingPoseError("to_global: no ego pose for frame " + std::to_string(r.frame_id));
    }
    const EgoPose& p = it->second;
    const double c = std::cos(p.heading), s = std::sin(p.heading);
    const double gx = c * r.x - s * r.y + p.x;
    const double gy = s * r.x + c * r.y + p.y;
    r.x = gx;
    r.y = gy;
  }
  return out;
}

TrajectoryDataset downsample(const TrajectoryDataset& dataset, int keep_every) {
  if (keep_every < 1) throw DomainError("downsample: keep_every must be >= 1");
  if (keep_every == 1) return dataset;
  const auto frames = dataset.frame_ids();
  std::set<std::int64_t> kept;
  for (std::size_t i = 0; i < frames.size(); i += static_cast<std::size_t>(keep_every)) {
    kept.insert(frames[i]);
  }
  TrajectoryDataset out;
  out.scene_id = dataset.scene_id;
  out.frame_rate = dataset.frame_rate / keep_every;
  for (const auto& r : dataset.records) {
    if (kept.count(r.frame_id)) out.records.push_back(r);
  }
  return out;
}

namespace {

std::vector<SceneWindow> cut_windows(const TrajectoryDataset& dataset, int t_obs, int t_pred,
                                     int stride) {
  const int t_total = t_obs + t_pred;
  const auto frames = dataset.frame_ids();
  std::vector<SceneWindow> windows;
  if (static_cast<int>(frames.size()) < t_total) return windows;

  std::unordered_map<std::int64_t, int> frame_index;
  for (std::size_t i = 0; i < frames.size(); ++i) frame_index[frames[i]] = static_cast<int>(i);

  // Per track: which frame indices it occupies, and its position there.
  std::map<std::int64_t, std::vector<int>> presence;
  std::unordered_map<std::int64_t, std::unordered_map<int, std::array<double, 2>>> location;
  for (const auto& r : dataset.records) {
    const int fi = frame_index.at(r.frame_id);
    presence[r.track_id].push_back(fi);
    location[r.track_id][fi] = {r.x, r.y};
  }
  for (auto& [track, frames_of] : presence) std::sort(frames_of.begin(), frames_of.end());

  const DensityGroup group = dataset.records.empty()
                                 ? DensityGroup::kUngrouped
                                 : density_group(dataset.avg_peds_per_frame());

  for (int start = 0; start + t_total <= static_cast<int>(frames.size()); start += stride) {
    SceneWindow w;
    w.t_obs = t_obs;
    w.t_pred = t_pred;
    w.scene_id = dataset.scene_id;
    w.group = group;
    for (const auto& [track, frames_of] : presence) {
      const auto lo = std::lower_bound(frames_of.begin(), frames_of.end(), start);
      bool full = true;
      for (int t = 0; t < t_total; ++t) {
        if (lo + t >= frames_of.end() || *(lo + t) != start + t) {
          full = false;
          break;
        }
      }
      if (!full) continue;
      w.track_ids.push_back(track);
      const auto& locs = location.at(track);
      for (int t = 0; t < t_total; ++t) w.positions.push_back(locs.at(start + t));
    }
    if (w.track_ids.empty()) continue;
    w.mask.assign(w.positions.size(), 1);
    windows.push_back(std::move(w));
  }
  return windows;
}

}  // namespace

std::vector<SceneWindow> make_windows(const TrajectoryDataset& dataset, int t_obs, int t_pred,
                                      int stride) {
  if (t_obs < 2) throw DomainError("make_windows: t_obs must be >= 2");
  if (t_pred < 1) throw DomainError("make_windows: t_pred must be >= 1");
  if (stride < 1) throw DomainError("make_windows: stride must be >= 1");
  return cut_windows(dataset, t_obs, t_pred, stride);
}

std::vector<SceneWindow> make_observation_windows(const TrajectoryDataset& dataset, int t_obs,
                                                  int stride) {
  if (t_obs < 2) throw DomainError("make_observation_windows: t_obs must be >= 2");
  if (stride < 1) throw DomainError("make_observation_windows: stride must be >= 1");
  return cut_windows(dataset, t_obs, 0, stride);
}

DisplacementWindow to_displacements(const SceneWindow& window) {
  DisplacementWindow out;
  out.track_ids = window.track_ids;
  out.t_obs = window.t_obs;
  out.t_pred = window.t_pred;
  out.positions = window.positions;
  const int t = window.t_total();
  out.displacements.resize(window.positions.size());
  for (int ped = 0; ped < window.n_peds(); ++ped) {
    const std::size_t base = static_cast<std::size_t>(ped) * t;
    out.displacements[base] = {0.0, 0.0};
    for (int step = 1; step < t; ++step) {
      out.displacements[base + step] = {
          window.positions[base + step][0] - window.positions[base + step - 1][0],
          window.positions[base + step][1] - window.positions[base + step - 1][1]};
    }
    out.origin.push_back(window.positions[base + window.t_obs - 1]);
  }
  return out;
}

}  // namespace crowdcast
