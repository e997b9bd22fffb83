#include "crowdcast/social.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "crowdcast/errors.hpp"
#include "crowdcast/rng.hpp"
#include "crowdcast/seqnet.hpp"

namespace crowdcast {
namespace {

Tensor random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  std::vector<double> data(static_cast<std::size_t>(shape_size(shape)));
  for (double& v : data) v = rng.uniform(lo, hi);
  return Tensor(std::move(shape), std::move(data));
}

SocialParams random_social(Rng& rng, int d_e, int d_r, int d_h) {
  return SocialParams{random_tensor(rng, {2, d_e}),
                      random_tensor(rng, {2, d_r}),
                      random_tensor(rng, {d_r, d_h}),
                      random_tensor(rng, {d_h}),
                      Tensor({1}, {0.25}),
                      random_tensor(rng, {d_h, 1}),
                      random_tensor(rng, {1}),
                      random_tensor(rng, {2 * d_e, 2 * d_e}),
                      random_tensor(rng, {2 * d_e}),
                      Tensor({1}, {0.25})};
}

double prelu_ref(double x, double a) { return x >= 0.0 ? x : a * x; }

// Straight-line reference for one pairwise interaction score.
double score_pair_ref(double dx, double dy, const SocialParams& p) {
  const int d_r = p.w_offset.shape()[1];
  const int d_h = p.w_score1.shape()[1];
  std::vector<double> embedded(static_cast<std::size_t>(d_r), 0.0);
  for (int c = 0; c < d_r; ++c) {
    embedded[c] = dx * p.w_offset.at({0, c}) + dy * p.w_offset.at({1, c});
  }
  std::vector<double> hidden(static_cast<std::size_t>(d_h), 0.0);
  for (int h = 0; h < d_h; ++h) {
    double acc = p.b_score1.at(h);
    for (int c = 0; c < d_r; ++c) acc += embedded[c] * p.w_score1.at({c, h});
    hidden[h] = prelu_ref(acc, p.slope_score.at(0));
  }
  double out = p.b_score2.at(0);
  for (int h = 0; h < d_h; ++h) out += hidden[h] * p.w_score2.at({h, 0});
  return out;
}

TEST(EmbedPositions, ZeroInputGivesZero) {
  Rng rng(1);
  const Tensor disp = Tensor::zeros({4, 3, 2});
  const Tensor e = embed_positions(disp, random_tensor(rng, {2, 8}));
  for (std::int64_t i = 0; i < e.size(); ++i) EXPECT_EQ(e.at(i), 0.0);
}

TEST(EmbedPositions, IdentityWeights) {
  const Tensor disp({1, 1, 2}, {1.0, 2.0});
  const Tensor w({2, 2}, {1, 0, 0, 1});
  const Tensor e = embed_positions(disp, w);
  EXPECT_DOUBLE_EQ(e.at(0), 1.0);
  EXPECT_DOUBLE_EQ(e.at(1), 2.0);
}

TEST(EmbedPositions, MatchesTripleLoopOracle) {
  Rng rng(2);
  const int t = 5, n = 4, d_e = 8;
  const Tensor disp = random_tensor(rng, {t, n, 2});
  const Tensor w = random_tensor(rng, {2, d_e});
  const Tensor e = embed_positions(disp, w);
  for (int ti = 0; ti < t; ++ti)
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < d_e; ++c) {
        const double want =
            disp.at({ti, i, 0}) * w.at({0, c}) + disp.at({ti, i, 1}) * w.at({1, c});
        EXPECT_NEAR(e.at({ti, i, c}), want, 1e-12);
      }
}

TEST(PairwiseOffsets, BySubtraction) {
  const Tensor pos({1, 2, 2}, {0, 0, 3, 4});
  const Tensor d = pairwise_offsets(pos);
  EXPECT_DOUBLE_EQ(d.at({0, 0, 1, 0}), 3.0);
  EXPECT_DOUBLE_EQ(d.at({0, 0, 1, 1}), 4.0);
  EXPECT_DOUBLE_EQ(d.at({0, 1, 0, 0}), -3.0);
  EXPECT_DOUBLE_EQ(d.at({0, 1, 0, 1}), -4.0);
}

TEST(PairwiseOffsets, SinglePedestrianAllZero) {
  const Tensor pos({3, 1, 2}, {1, 2, 3, 4, 5, 6});
  const Tensor d = pairwise_offsets(pos);
  EXPECT_EQ(d.shape(), (Shape{3, 1, 1, 2}));
  for (std::int64_t i = 0; i < d.size(); ++i) EXPECT_EQ(d.at(i), 0.0);
}

TEST(PairwiseOffsets, AntisymmetryExact) {
  Rng rng(3);
  const int t = 4, n = 5;
  const Tensor d = pairwise_offsets(random_tensor(rng, {t, n, 2}, -30, 30));
  for (int ti = 0; ti < t; ++ti)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int c = 0; c < 2; ++c) {
          EXPECT_EQ(d.at({ti, i, j, c}), -d.at({ti, j, i, c}));
        }
}

TEST(InteractionWeights, ZeroOutputLayerGivesZeroWeights) {
  Rng rng(4);
  SocialParams p = random_social(rng, 4, 4, 6);
  p.w_score2 = Tensor::zeros({6, 1});
  p.b_score2 = Tensor::zeros({1});
  const Tensor r = interaction_weights(pairwise_offsets(random_tensor(rng, {2, 3, 2})), p);
  for (std::int64_t i = 0; i < r.size(); ++i) EXPECT_EQ(r.at(i), 0.0);
}

TEST(InteractionWeights, WeightDependsOnlyOnOffset) {
  Rng rng(5);
  const SocialParams p = random_social(rng, 4, 4, 6);
  // Pedestrians 0-1 and 2-3 sit at the same relative offset.
  const Tensor pos({1, 4, 2}, {0, 0, 1, 2, 10, 10, 11, 12});
  const Tensor r = interaction_weights(pairwise_offsets(pos), p);
  EXPECT_EQ(r.at({0, 0, 1}), r.at({0, 2, 3}));
  EXPECT_EQ(r.at({0, 1, 0}), r.at({0, 3, 2}));
}

TEST(InteractionWeights, DiagonalForcedToZero) {
  Rng rng(6);
  SocialParams p = random_social(rng, 4, 4, 6);
  // Nonzero biases make the un-masked MLP output nonzero even at offset 0.
  const Tensor r = interaction_weights(pairwise_offsets(random_tensor(rng, {3, 4, 2})), p);
  for (int t = 0; t < 3; ++t)
    for (int i = 0; i < 4; ++i) EXPECT_EQ(r.at({t, i, i}), 0.0);
  EXPECT_NE(score_pair_ref(0.0, 0.0, p), 0.0);
}

TEST(InteractionWeights, MatchesPerPairOracle) {
  Rng rng(7);
  const SocialParams p = random_social(rng, 4, 5, 7);
  const int t = 3, n = 4;
  const Tensor pos = random_tensor(rng, {t, n, 2}, -10, 10);
  const Tensor offsets = pairwise_offsets(pos);
  const Tensor r = interaction_weights(offsets, p);
  for (int ti = 0; ti < t; ++ti)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double want =
            i == j ? 0.0 : score_pair_ref(offsets.at({ti, i, j, 0}), offsets.at({ti, i, j, 1}), p);
        EXPECT_NEAR(r.at({ti, i, j}), want, 1e-12);
      }
}

TEST(AggregateSocial, SinglePedestrianGivesZero) {
  Rng rng(8);
  const Tensor e = random_tensor(rng, {4, 1, 6});
  const Tensor r = Tensor::zeros({4, 1, 1});
  const Tensor f = aggregate_social(e, r);
  for (std::int64_t i = 0; i < f.size(); ++i) EXPECT_EQ(f.at(i), 0.0);
}

TEST(AggregateSocial, UnitWeightCopiesNeighbour) {
  const Tensor e({1, 2, 3}, {9, 9, 9, 1, 2, 3});  // e^0 = (9,9,9), e^1 = (1,2,3)
  const Tensor r({1, 2, 2}, {0, 1, 0, 0});        // r[0][1] = 1
  const Tensor f = aggregate_social(e, r);
  EXPECT_DOUBLE_EQ(f.at({0, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(f.at({0, 0, 1}), 2.0);
  EXPECT_DOUBLE_EQ(f.at({0, 0, 2}), 3.0);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(f.at({0, 1, c}), 0.0);
}

TEST(AggregateSocial, MatchesDoubleLoopOracle) {
  Rng rng(9);
  const int t = 3, n = 4, d_e = 5;
  const Tensor e = random_tensor(rng, {t, n, d_e});
  Tensor r = random_tensor(rng, {t, n, n});
  // Zero the diagonal the way interaction_weights does.
  std::vector<double> rd(r.data());
  for (int ti = 0; ti < t; ++ti)
    for (int i = 0; i < n; ++i) rd[(static_cast<std::size_t>(ti) * n + i) * n + i] = 0.0;
  r = Tensor({t, n, n}, std::move(rd));
  const Tensor f = aggregate_social(e, r);
  for (int ti = 0; ti < t; ++ti)
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < d_e; ++c) {
        double want = 0.0;
        for (int j = 0; j < n; ++j) want += r.at({ti, i, j}) * e.at({ti, j, c});
        EXPECT_NEAR(f.at({ti, i, c}), want, 1e-12);
      }
}

TEST(FuseFeatures, AllZeroWithZeroBiasIsZero) {
  Rng rng(10);
  SocialParams p = random_social(rng, 4, 4, 4);
  p.b_fuse = Tensor::zeros({8});
  const Tensor s = fuse_features(Tensor::zeros({2, 3, 4}), Tensor::zeros({2, 3, 4}), p);
  for (std::int64_t i = 0; i < s.size(); ++i) EXPECT_EQ(s.at(i), 0.0);
}

TEST(FuseFeatures, IdentityFuseIsPooledConcat) {
  // With F = 0, identity W_c, zero bias and non-negative e the MLP is the
  // identity, so s is the window-2 channel max of (e ++ 0). Hand-computed:
  // e = (0.5, 0.2, 0.9, 0.1) pools to (0.5, 0.9) and the zero half to (0, 0).
  Rng rng(11);
  SocialParams p = random_social(rng, 4, 4, 4);
  std::vector<double> eye(8 * 8, 0.0);
  for (int i = 0; i < 8; ++i) eye[static_cast<std::size_t>(i) * 8 + i] = 1.0;
  p.w_fuse = Tensor({8, 8}, std::move(eye));
  p.b_fuse = Tensor::zeros({8});
  const Tensor e({1, 1, 4}, {0.5, 0.2, 0.9, 0.1});
  const Tensor s = fuse_features(e, Tensor::zeros({1, 1, 4}), p);
  EXPECT_EQ(s.shape(), (Shape{1, 1, 4}));
  EXPECT_DOUBLE_EQ(s.at(0), 0.5);
  EXPECT_DOUBLE_EQ(s.at(1), 0.9);
  EXPECT_DOUBLE_EQ(s.at(2), 0.0);
  EXPECT_DOUBLE_EQ(s.at(3), 0.0);
}

TEST(FuseFeatures, MatchesPerPedestrianOracle) {
  Rng rng(12);
  const int t = 2, n = 3, d_e = 4;
  const SocialParams p = random_social(rng, d_e, 4, 4);
  const Tensor e = random_tensor(rng, {t, n, d_e});
  const Tensor f = random_tensor(rng, {t, n, d_e});
  const Tensor s = fuse_features(e, f, p);
  for (int ti = 0; ti < t; ++ti)
    for (int i = 0; i < n; ++i) {
      std::vector<double> joint(2 * d_e);
      for (int c = 0; c < d_e; ++c) {
        joint[c] = e.at({ti, i, c});
        joint[d_e + c] = f.at({ti, i, c});
      }
      std::vector<double> mixed(2 * d_e);
      for (int o = 0; o < 2 * d_e; ++o) {
        double acc = p.b_fuse.at(o);
        for (int c = 0; c < 2 * d_e; ++c) acc += joint[c] * p.w_fuse.at({c, o});
        mixed[o] = prelu_ref(acc, p.slope_fuse.at(0));
      }
      for (int c = 0; c < d_e; ++c) {
        EXPECT_NEAR(s.at({ti, i, c}), std::max(mixed[2 * c], mixed[2 * c + 1]), 1e-12);
      }
    }
}

// Positions on a dyadic grid (multiples of 1/64 with bounded magnitude) keep
// the shift addition exact in floating point, so the invariance check can be
// bitwise: any dependence of the weights on absolute position would show.
Tensor grid_positions(Rng& rng, int t, int n) {
  std::vector<double> data(static_cast<std::size_t>(t) * n * 2);
  for (double& v : data) {
    v = static_cast<double>(static_cast<std::int64_t>(rng.below(2 * 64 * 1024)) - 64 * 1024) / 64.0;
  }
  return Tensor({t, n, 2}, std::move(data));
}

TEST(SocialInvariants, TranslationLeavesWeightsBitIdentical) {
  Rng rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    const int t = 3, n = 4;
    const SocialParams p = random_social(rng, 4, 4, 6);
    const Tensor pos = grid_positions(rng, t, n);
    const double cx = static_cast<double>(static_cast<std::int64_t>(rng.below(128 * 1024)) - 64 * 1024) / 64.0;
    const double cy = static_cast<double>(static_cast<std::int64_t>(rng.below(128 * 1024)) - 64 * 1024) / 64.0;
    std::vector<double> shifted(pos.data());
    for (std::size_t i = 0; i < shifted.size(); i += 2) {
      shifted[i] += cx;
      shifted[i + 1] += cy;
    }
    const Tensor r0 = interaction_weights(pairwise_offsets(pos), p);
    const Tensor r1 = interaction_weights(pairwise_offsets(Tensor({t, n, 2}, std::move(shifted))), p);
    EXPECT_TRUE(r0.same_bits(r1));
  }
}

std::vector<int> random_permutation(Rng& rng, int n) {
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)))]);
  }
  return perm;
}

TEST(SocialInvariants, PermutationEquivariantBitwise) {
  Rng rng(14);
  for (int rep = 0; rep < 50; ++rep) {
    const int t = 3, n = 5, d_e = 4;
    const SocialParams p = random_social(rng, d_e, 4, 6);
    const Tensor pos = random_tensor(rng, {t, n, 2}, -10, 10);
    const Tensor disp = random_tensor(rng, {t, n, 2}, -0.5, 0.5);
    const auto perm = random_permutation(rng, n);

    auto permute3 = [&](const Tensor& x) {
      std::vector<double> out(static_cast<std::size_t>(x.size()));
      const int c_n = x.shape()[2];
      for (int ti = 0; ti < t; ++ti)
        for (int i = 0; i < n; ++i)
          for (int c = 0; c < c_n; ++c)
            out[(static_cast<std::size_t>(ti) * n + i) * c_n + c] = x.at({ti, perm[i], c});
      return Tensor(x.shape(), std::move(out));
    };

    const Tensor e0 = embed_positions(disp, p.w_embed);
    const Tensor r0 = interaction_weights(pairwise_offsets(pos), p);
    const Tensor f0 = aggregate_social(e0, r0);
    const Tensor s0 = fuse_features(e0, f0, p);

    const Tensor e1 = embed_positions(permute3(disp), p.w_embed);
    const Tensor r1 = interaction_weights(pairwise_offsets(permute3(pos)), p);
    const Tensor f1 = aggregate_social(e1, r1);
    const Tensor s1 = fuse_features(e1, f1, p);

    EXPECT_TRUE(permute3(s0).same_bits(s1));
    EXPECT_TRUE(permute3(f0).same_bits(f1));
    // r permutes on both pedestrian axes.
    std::vector<double> r_perm(static_cast<std::size_t>(r0.size()));
    for (int ti = 0; ti < t; ++ti)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          r_perm[(static_cast<std::size_t>(ti) * n + i) * n + j] = r0.at({ti, perm[i], perm[j]});
    EXPECT_TRUE(Tensor(r0.shape(), std::move(r_perm)).same_bits(r1));
  }
}

TEST(SocialInvariants, SelfWeightGetsNoGradient) {
  Rng rng(15);
  const int t = 2, n = 3, d_e = 4;
  Tape tape;
  const Tensor e = random_tensor(rng, {t, n, d_e});
  const Tensor r_raw = tape.leaf(random_tensor(rng, {t, n, n}));
  std::vector<std::uint8_t> diag(static_cast<std::size_t>(t) * n * n, 0);
  for (int ti = 0; ti < t; ++ti)
    for (int i = 0; i < n; ++i) diag[(static_cast<std::size_t>(ti) * n + i) * n + i] = 1;
  const Tensor r = masked_fill(r_raw, std::move(diag), 0.0);
  const Tensor loss = reduce_sum(aggregate_social(e, r));
  const Tensor g = tape.backward(loss).at(r_raw.node());
  for (int ti = 0; ti < t; ++ti)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) {
          EXPECT_EQ(g.at({ti, i, j}), 0.0);
        } else {
          EXPECT_NE(g.at({ti, i, j}), 0.0);
        }
      }
}

}  // namespace
}  // namespace crowdcast
