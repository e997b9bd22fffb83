#include "crowdcast/social.hpp"

#include "crowdcast/errors.hpp"

namespace crowdcast {

Tensor embed_positions(const Tensor& disp, const Tensor& w_embed) {
  return matmul(disp, w_embed);
}

Tensor pairwise_offsets(const Tensor& positions) {
  const Shape& s = positions.shape();
  if (s.size() != 3 || s[2] != 2) {
    throw ShapeError("pairwise_offsets: expected [T,n,2], got " + shape_str(s));
  }
  const int t_n = s[0], n = s[1];
  std::vector<double> out(static_cast<std::size_t>(t_n) * n * n * 2, 0.0);
  const auto& p = positions.data();
  for (int t = 0; t < t_n; ++t) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const std::size_t at = ((static_cast<std::size_t>(t) * n + i) * n + j) * 2;
        const std::size_t pi = (static_cast<std::size_t>(t) * n + i) * 2;
        const std::size_t pj = (static_cast<std::size_t>(t) * n + j) * 2;
        out[at] = p[pj] - p[pi];
        out[at + 1] = p[pj + 1] - p[pi + 1];
      }
    }
  }
  return Tensor({t_n, n, n, 2}, std::move(out));
}

Tensor interaction_weights(const Tensor& offsets, const SocialParams& params) {
  const Shape& s = offsets.shape();
  if (s.size() != 4 || s[1] != s[2] || s[3] != 2) {
    throw ShapeError("interaction_weights: expected [T,n,n,2], got " + shape_str(s));
  }
  const int t_n = s[0], n = s[1];
  const Tensor embedded = matmul(offsets, params.w_offset);  // [T,n,n,d_r]
  const Tensor hidden =
      prelu(add(matmul(embedded, params.w_score1), params.b_score1), params.slope_score);
  const Tensor score = add(matmul(hidden, params.w_score2), params.b_score2);  // [T,n,n,1]
  const Tensor raw = reshape(score, {t_n, n, n});

  std::vector<std::uint8_t> diagonal(static_cast<std::size_t>(t_n) * n * n, 0);
  for (int t = 0; t < t_n; ++t) {
    for (int i = 0; i < n; ++i) {
      diagonal[(static_cast<std::size_t>(t) * n + i) * n + i] = 1;
    }
  }
  return masked_fill(raw, std::move(diagonal), 0.0);
}

Tensor aggregate_social(const Tensor& embedded, const Tensor& weights) {
  const Shape& se = embedded.shape();
  const Shape& sr = weights.shape();
  if (se.size() != 3 || sr.size() != 3 || se[0] != sr[0] || se[1] != sr[1] || sr[1] != sr[2]) {
    throw ShapeError("aggregate_social: embedded " + shape_str(se) + " does not pair with weights " +
                     shape_str(sr));
  }
  const int t_n = se[0], n = se[1], d_e = se[2];
  const Tensor r4 = reshape(weights, {t_n, n, n, 1});
  const Tensor e4 = reshape(embedded, {t_n, 1, n, d_e});
  const Tensor product = mul(r4, e4);              // [T,n,n,d_e]
  return reduce_sum(product, 2, /*sorted_sum=*/true);  // [T,n,d_e]
}

Tensor fuse_features(const Tensor& embedded, const Tensor& social, const SocialParams& params) {
  const Tensor joint = concat(embedded, social, 2);  // [T,n,2*d_e]
  const Tensor mixed = prelu(add(matmul(joint, params.w_fuse), params.b_fuse), params.slope_fuse);
  return max_pool_channel(mixed, 2);  // back to [T,n,d_e]
}

}  // namespace crowdcast
