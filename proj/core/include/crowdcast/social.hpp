#pragma once

#include "crowdcast/tensor.hpp"

namespace crowdcast {

// Learned weights of the social interaction extractor: a position embedding,
// an offset embedding feeding a two-layer MLP that scores pairwise
// interaction, and a fuse MLP applied to the concatenated ego/social
// features before channel pooling.
struct SocialParams {
  Tensor w_embed;        // [2, d_e]
  Tensor w_offset;       // [2, d_r]
  Tensor w_score1;       // [d_r, d_h]
  Tensor b_score1;       // [d_h]
  Tensor slope_score;    // [1]
  Tensor w_score2;       // [d_h, 1]
  Tensor b_score2;       // [1]
  Tensor w_fuse;         // [2*d_e, 2*d_e]
  Tensor b_fuse;         // [2*d_e]
  Tensor slope_fuse;     // [1]

  int d_e() const { return w_embed.shape()[1]; }
};

// e_t^i = X_t^i * W_e for per-step displacements X. disp: [T, n, 2].
Tensor embed_positions(const Tensor& disp, const Tensor& w_embed);

// Pairwise position offsets d[t][i][j] = pos[t][j] - pos[t][i], an
// antisymmetric [T, n, n, 2] tensor with zero diagonal. Computed from the
// absolute in-window positions; carries no gradient (inputs are data).
Tensor pairwise_offsets(const Tensor& positions);

// Interaction attention weights r[t][i][j] of pedestrian j on pedestrian i:
// each off-diagonal offset runs through the offset embedding and the scoring
// MLP; the diagonal is forced to zero so a pedestrian never attends to
// itself (and receives no gradient there).
Tensor interaction_weights(const Tensor& offsets, const SocialParams& params);

// f_t^i = sum_j e_t^j * r[t][i][j]. The sum over neighbours folds addends
// in value order, which keeps the result bit-identical under any
// permutation of the pedestrians.
Tensor aggregate_social(const Tensor& embedded, const Tensor& weights);

// s_t^i = maxpool(PReLU((e_t^i ++ f_t^i) W_c + b)): fuse ego embedding with
// the aggregated social feature, then channel max-pool with window 2 back
// to d_e.
Tensor fuse_features(const Tensor& embedded, const Tensor& social, const SocialParams& params);

}  // namespace crowdcast
