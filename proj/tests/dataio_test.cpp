#include "crowdcast/dataio.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "crowdcast/errors.hpp"
#include "crowdcast/rng.hpp"

namespace crowdcast {
namespace {

TEST(LoadTrajectories, ParsesTwoRecords) {
  const auto ds = parse_trajectories("0 1 0.0 0.0\n1 1 1.0 0.0\n", "mem");
  ASSERT_EQ(ds.records.size(), 2u);
  EXPECT_EQ(ds.num_tracks(), 1u);
  EXPECT_EQ(ds.records[1].frame_id, 1);
  EXPECT_DOUBLE_EQ(ds.records[1].x, 1.0);
}

TEST(LoadTrajectories, EmptyFileGivesEmptyDataset) {
  const auto ds = parse_trajectories("", "mem");
  EXPECT_TRUE(ds.records.empty());
  EXPECT_EQ(ds.num_tracks(), 0u);
}

TEST(LoadTrajectories, MalformedRowNamesLine) {
  try {
    parse_trajectories("0 1 abc 0.0\n", "mem");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(LoadTrajectories, CommentsAndTabsAccepted) {
  const auto ds = parse_trajectories("# header\n0\t1\t0.5\t0.25\n1 1 1.0 0.0  # trailing\n", "mem");
  EXPECT_EQ(ds.records.size(), 2u);
  EXPECT_DOUBLE_EQ(ds.records[0].y, 0.25);
}

TEST(LoadTrajectories, DuplicatePairRejected) {
  EXPECT_THROW(parse_trajectories("0 1 0 0\n0 1 1 1\n", "mem"), DuplicateError);
}

TEST(ToGlobal, IdentityPoseIsIdentity) {
  auto ds = parse_trajectories("0 1 1.0 0.0\n", "mem");
  EgoPoseTrack ego;
  ego.poses[0] = {0.0, 0.0, 0.0};
  const auto out = to_global(ds, ego);
  EXPECT_DOUBLE_EQ(out.records[0].x, 1.0);
  EXPECT_DOUBLE_EQ(out.records[0].y, 0.0);
}

TEST(ToGlobal, QuarterTurn) {
  auto ds = parse_trajectories("0 1 1.0 0.0\n", "mem");
  EgoPoseTrack ego;
  ego.poses[0] = {0.0, 0.0, M_PI / 2};
  const auto out = to_global(ds, ego);
  EXPECT_NEAR(out.records[0].x, 0.0, 1e-15);
  EXPECT_NEAR(out.records[0].y, 1.0, 1e-15);
}

TEST(ToGlobal, Translation) {
  auto ds = parse_trajectories("0 1 1.0 1.0\n", "mem");
  EgoPoseTrack ego;
  ego.poses[0] = {2.0, 3.0, 0.0};
  const auto out = to_global(ds, ego);
  EXPECT_DOUBLE_EQ(out.records[0].x, 3.0);
  EXPECT_DOUBLE_EQ(out.records[0].y, 4.0);
}

TEST(ToGlobal, MissingPoseRejected) {
  auto ds = parse_trajectories("0 1 1.0 1.0\n5 1 2.0 2.0\n", "mem");
  EgoPoseTrack ego;
  ego.poses[0] = {0.0, 0.0, 0.0};
  EXPECT_THROW(to_global(ds, ego), MissingPoseError);
}

TrajectoryDataset straight_track(std::int64_t track, int first_frame, int n_frames,
                                 double x0 = 0.0, double vx = 1.0) {
  TrajectoryDataset ds;
  ds.scene_id = "synthetic";
  for (int f = 0; f < n_frames; ++f) {
    ds.records.push_back({first_frame + f, track, x0 + vx * f, 0.0});
  }
  return ds;
}

TEST(MakeWindows, ExactFitGivesOneWindow) {
  const auto windows = make_windows(straight_track(1, 0, 20), 8, 12, 1);
  ASSERT_EQ(windows.size(), 1u);
  EXPECT_EQ(windows[0].n_peds(), 1);
  EXPECT_EQ(windows[0].t_total(), 20);
}

TEST(MakeWindows, TwentyOneFramesGiveTwoWindows) {
  EXPECT_EQ(make_windows(straight_track(1, 0, 21), 8, 12, 1).size(), 2u);
}

TEST(MakeWindows, OverlappingTracksSplitByPresence) {
  // Track 1 spans frames 0-19, track 2 spans 5-24. Enumerating candidate
  // offsets 0..5 by hand: only offset 0 (track 1 full) and offset 5
  // (track 2 full) yield a fully present pedestrian.
  TrajectoryDataset ds = straight_track(1, 0, 20);
  const TrajectoryDataset second = straight_track(2, 5, 20, 100.0);
  ds.records.insert(ds.records.end(), second.records.begin(), second.records.end());
  const auto windows = make_windows(ds, 8, 12, 1);
  ASSERT_EQ(windows.size(), 2u);
  ASSERT_EQ(windows[0].n_peds(), 1);
  EXPECT_EQ(windows[0].track_ids[0], 1);
  ASSERT_EQ(windows[1].n_peds(), 1);
  EXPECT_EQ(windows[1].track_ids[0], 2);
  EXPECT_DOUBLE_EQ(windows[1].pos(0, 0)[0], 100.0);
}

TEST(MakeWindows, MaskIsAllTrue) {
  const auto windows = make_windows(straight_track(1, 0, 25), 8, 12, 2);
  for (const auto& w : windows) {
    ASSERT_EQ(w.mask.size(), w.positions.size());
    for (auto m : w.mask) EXPECT_EQ(m, 1);
  }
}

TEST(ToDisplacements, ConstantVelocity) {
  TrajectoryDataset ds;
  for (int f = 0; f < 3; ++f) ds.records.push_back({f, 1, static_cast<double>(f), 0.0});
  const auto windows = make_windows(ds, 2, 1, 1);
  ASSERT_EQ(windows.size(), 1u);
  const auto d = to_displacements(windows[0]);
  EXPECT_DOUBLE_EQ(d.displacements[0][0], 0.0);
  EXPECT_DOUBLE_EQ(d.displacements[1][0], 1.0);
  EXPECT_DOUBLE_EQ(d.displacements[2][0], 1.0);
  EXPECT_DOUBLE_EQ(d.origin[0][0], 1.0);  // position at step t_obs-1
}

TEST(ToDisplacements, StationaryPedestrianIsAllZero) {
  TrajectoryDataset ds;
  for (int f = 0; f < 20; ++f) ds.records.push_back({f, 7, 3.25, -1.5});
  const auto d = to_displacements(make_windows(ds, 8, 12, 1)[0]);
  for (const auto& v : d.displacements) {
    EXPECT_EQ(v[0], 0.0);
    EXPECT_EQ(v[1], 0.0);
  }
}

TEST(ToDisplacements, RoundTripIsExact) {
  Rng rng(42);
  for (int rep = 0; rep < 50; ++rep) {
    TrajectoryDataset ds;
    const int n_peds = 1 + static_cast<int>(rng.below(4));
    for (int p = 0; p < n_peds; ++p) {
      double x = rng.uniform(-50, 50), y = rng.uniform(-50, 50);
      for (int f = 0; f < 20; ++f) {
        ds.records.push_back({f, p, x, y});
        x += rng.uniform(-0.6, 0.6);
        y += rng.uniform(-0.6, 0.6);
      }
    }
    const auto w = make_windows(ds, 8, 12, 1).at(0);
    const auto d = to_displacements(w);
    for (int ped = 0; ped < w.n_peds(); ++ped) {
      double x = w.pos(ped, 0)[0], y = w.pos(ped, 0)[1];
      for (int t = 1; t < w.t_total(); ++t) {
        x += d.displacements[static_cast<std::size_t>(ped) * 20 + t][0];
        y += d.displacements[static_cast<std::size_t>(ped) * 20 + t][1];
        EXPECT_EQ(x, w.pos(ped, t)[0]);
        EXPECT_EQ(y, w.pos(ped, t)[1]);
      }
    }
  }
}

TEST(DensityGroup, TableBoundaries) {
  EXPECT_EQ(density_group(10), DensityGroup::kGroup1);
  EXPECT_EQ(density_group(40), DensityGroup::kGroup2);
  EXPECT_EQ(density_group(65), DensityGroup::kUngrouped);
  EXPECT_EQ(density_group(16), DensityGroup::kUngrouped);
  EXPECT_EQ(density_group(100), DensityGroup::kGroup3);
  EXPECT_THROW(density_group(-1), DomainError);
}

TEST(Downsample, KeepsEveryKth) {
  const auto ds = downsample(straight_track(1, 0, 40), 4);
  const auto frames = ds.frame_ids();
  ASSERT_EQ(frames.size(), 10u);
  EXPECT_EQ(frames[1], 4);
  EXPECT_DOUBLE_EQ(ds.frame_rate, 2.5 / 4);
}

TEST(SaveLoad, RoundTripIdenticalRecords) {
  Rng rng(7);
  TrajectoryDataset ds;
  ds.scene_id = "roundtrip";
  for (int f = 0; f < 12; ++f) {
    for (int p = 0; p < 3; ++p) {
      ds.records.push_back({f, p, rng.uniform(-100, 100), rng.uniform(-100, 100)});
    }
  }
  const std::string path = testing::TempDir() + "/roundtrip_traj.txt";
  save_trajectories(ds, path);
  const auto back = load_trajectories(path);
  ASSERT_EQ(back.records.size(), ds.records.size());
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    EXPECT_EQ(back.records[i], ds.records[i]);
  }
}

}  // namespace
}  // namespace crowdcast
