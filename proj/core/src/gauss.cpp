#include "crowdcast/gauss.hpp"

#include <cmath>
#include <cstdio>

#include "crowdcast/errors.hpp"

namespace crowdcast {

namespace {

constexpr double kSigmaFloor = 1e-6;
constexpr double kRhoLimit = 1.0 - 1e-15;
constexpr double kLogTwoPi = 1.8378770664093453;

// Channel c of raw [t_pred, n, 5] as a [t_pred, n] tensor, extracted with a
// one-hot matmul so gradients flow through.
Tensor channel(const Tensor& raw, int c) {
  std::vector<double> sel(5, 0.0);
  sel[static_cast<std::size_t>(c)] = 1.0;
  const Tensor picked = matmul(raw, Tensor({5, 1}, std::move(sel)));
  return reshape(picked, {raw.shape()[0], raw.shape()[1]});
}

Tensor clamp_above(const Tensor& x, double lo) {
  std::vector<std::uint8_t> below(static_cast<std::size_t>(x.size()), 0);
  bool any = false;
  for (std::int64_t i = 0; i < x.size(); ++i) {
    if (x.at(i) < lo) {
      below[static_cast<std::size_t>(i)] = 1;
      any = true;
    }
  }
  return any ? masked_fill(x, std::move(below), lo) : x;
}

Tensor clamp_below(const Tensor& x, double hi) {
  std::vector<std::uint8_t> above(static_cast<std::size_t>(x.size()), 0);
  bool any = false;
  for (std::int64_t i = 0; i < x.size(); ++i) {
    if (x.at(i) > hi) {
      above[static_cast<std::size_t>(i)] = 1;
      any = true;
    }
  }
  return any ? masked_fill(x, std::move(above), hi) : x;
}

Tensor reciprocal_of_positive(const Tensor& x) { return exp(scalar_mul(log(x), -1.0)); }

}  // namespace

BiGaussianSeq decode_params(const Tensor& raw) {
  if (raw.rank() != 3 || raw.shape()[2] != 5) {
    throw ShapeError("decode_params: expected [t_pred,n,5], got " + shape_str(raw.shape()));
  }
  if (!raw.all_finite()) {
    throw NumericsError("decode_params: raw output contains non-finite values");
  }
  BiGaussianSeq out;
  out.mu_x = channel(raw, 0);
  out.mu_y = channel(raw, 1);
  out.sigma_x = clamp_above(exp(channel(raw, 2)), kSigmaFloor);
  out.sigma_y = clamp_above(exp(channel(raw, 3)), kSigmaFloor);
  out.rho = clamp_below(clamp_above(tanh(channel(raw, 4)), -kRhoLimit), kRhoLimit);
  return out;
}

NllResult nll(const BiGaussianSeq& p, const Tensor& targets) {
  const int t_pred = p.t_pred(), n = p.n_peds();
  if (targets.shape() != Shape{t_pred, n, 2}) {
    throw ShapeError("nll: targets " + shape_str(targets.shape()) + " do not match params [" +
                     std::to_string(t_pred) + "," + std::to_string(n) + ",2]");
  }
  for (std::int64_t i = 0; i < p.sigma_x.size(); ++i) {
    if (p.sigma_x.at(i) <= 0.0 || p.sigma_y.at(i) <= 0.0) {
      throw DomainError("nll: sigma must be positive");
    }
    if (std::abs(p.rho.at(i)) >= 1.0) {
      throw DomainError("nll: |rho| must be < 1");
    }
  }

  // Split the constant targets into per-axis [t_pred, n] tensors.
  std::vector<double> tx(static_cast<std::size_t>(t_pred) * n), ty(tx.size());
  for (std::size_t i = 0; i < tx.size(); ++i) {
    tx[i] = targets.at(static_cast<std::int64_t>(2 * i));
    ty[i] = targets.at(static_cast<std::int64_t>(2 * i + 1));
  }
  const Tensor target_x({t_pred, n}, std::move(tx));
  const Tensor target_y({t_pred, n}, std::move(ty));

  const Tensor dx = sub(target_x, p.mu_x);
  const Tensor dy = sub(target_y, p.mu_y);
  const Tensor zx = mul(dx, reciprocal_of_positive(p.sigma_x));
  const Tensor zy = mul(dy, reciprocal_of_positive(p.sigma_y));

  const Tensor one_minus_rho2 = sub(Tensor::full({t_pred, n}, 1.0), mul(p.rho, p.rho));
  const Tensor log_omr = log(one_minus_rho2);
  const Tensor quad = sub(add(mul(zx, zx), mul(zy, zy)), scalar_mul(mul(mul(p.rho, zx), zy), 2.0));

  const Tensor point =
      add(add(add(Tensor::full({t_pred, n}, kLogTwoPi), add(log(p.sigma_x), log(p.sigma_y))),
              scalar_mul(log_omr, 0.5)),
          scalar_mul(mul(quad, reciprocal_of_positive(one_minus_rho2)), 0.5));

  NllResult result;
  result.count = static_cast<std::int64_t>(t_pred) * n;
  result.sum = reduce_sum(point);
  result.mean = scalar_mul(result.sum, 1.0 / static_cast<double>(result.count));
  return result;
}

Tensor sample_displacements(const BiGaussianSeq& p, Rng& rng) {
  const int t_pred = p.t_pred(), n = p.n_peds();
  std::vector<double> out(static_cast<std::size_t>(t_pred) * n * 2);
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(t_pred) * n; ++i) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double sx = p.sigma_x.at(i), sy = p.sigma_y.at(i), r = p.rho.at(i);
    out[static_cast<std::size_t>(2 * i)] = p.mu_x.at(i) + sx * z1;
    out[static_cast<std::size_t>(2 * i + 1)] =
        p.mu_y.at(i) + sy * (r * z1 + std::sqrt(1.0 - r * r) * z2);
  }
  return Tensor({t_pred, n, 2}, std::move(out));
}

Tensor mean_displacements(const BiGaussianSeq& p) {
  const int t_pred = p.t_pred(), n = p.n_peds();
  std::vector<double> out(static_cast<std::size_t>(t_pred) * n * 2);
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(t_pred) * n; ++i) {
    out[static_cast<std::size_t>(2 * i)] = p.mu_x.at(i);
    out[static_cast<std::size_t>(2 * i + 1)] = p.mu_y.at(i);
  }
  return Tensor({t_pred, n, 2}, std::move(out));
}

Tensor displacements_to_absolute(const Tensor& disp_pred,
                                 const std::vector<std::array<double, 2>>& origin) {
  const Shape& s = disp_pred.shape();
  if (s.size() != 3 || s[2] != 2 || static_cast<std::size_t>(s[1]) != origin.size()) {
    throw ShapeError("displacements_to_absolute: bad shapes " + shape_str(s) + " with origin n=" +
                     std::to_string(origin.size()));
  }
  for (const auto& o : origin) {
    if (!std::isfinite(o[0]) || !std::isfinite(o[1])) {
      throw NumericsError("displacements_to_absolute: origin is not finite");
    }
  }
  const int t_pred = s[0], n = s[1];
  std::vector<double> out(static_cast<std::size_t>(t_pred) * n * 2);
  for (int ped = 0; ped < n; ++ped) {
    double x = origin[static_cast<std::size_t>(ped)][0];
    double y = origin[static_cast<std::size_t>(ped)][1];
    for (int t = 0; t < t_pred; ++t) {
      const std::size_t at = (static_cast<std::size_t>(t) * n + ped) * 2;
      x += disp_pred.at(static_cast<std::int64_t>(at));
      y += disp_pred.at(static_cast<std::int64_t>(at + 1));
      out[at] = x;
      out[at + 1] = y;
    }
  }
  return Tensor({t_pred, n, 2}, std::move(out));
}

void append_distribution_csv(std::string* out, const BiGaussianSeq& p,
                             const std::vector<std::int64_t>& track_ids, int window_id) {
  char buf[256];
  for (int ped = 0; ped < p.n_peds(); ++ped) {
    for (int step = 0; step < p.t_pred(); ++step) {
      const std::int64_t i = static_cast<std::int64_t>(step) * p.n_peds() + ped;
      std::snprintf(buf, sizeof(buf), "%d,%lld,%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", window_id,
                    static_cast<long long>(track_ids[static_cast<std::size_t>(ped)]), step + 1,
                    p.mu_x.at(i), p.mu_y.at(i), p.sigma_x.at(i), p.sigma_y.at(i), p.rho.at(i));
      *out += buf;
    }
  }
}

}  // namespace crowdcast
