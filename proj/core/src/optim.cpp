#include "crowdcast/optim.hpp"

#include <cmath>

#include "crowdcast/errors.hpp"

namespace crowdcast {

NamedTensors track_params(Tape& tape, const NamedTensors& params) {
  NamedTensors tracked;
  for (const auto& [name, value] : params) {
    tracked.emplace(name, tape.leaf(value));
  }
  return tracked;
}

NamedTensors grads_by_name(const GradMap& grads, const NamedTensors& tracked) {
  NamedTensors out;
  for (const auto& [name, leaf] : tracked) {
    out.emplace(name, grads.at(leaf.node()));
  }
  return out;
}

NamedTensors sgd_step(const NamedTensors& params, const NamedTensors& grads, double lr) {
  NamedTensors next;
  for (const auto& [name, p] : params) {
    auto it = grads.find(name);
    if (it == grads.end()) {
      throw ShapeError("sgd_step: no gradient for parameter '" + name + "'");
    }
    const Tensor& g = it->second;
    if (g.shape() != p.shape()) {
      throw ShapeError("sgd_step: gradient " + shape_str(g.shape()) + " does not match parameter '" +
                       name + "' " + shape_str(p.shape()));
    }
    std::vector<double> updated(p.data());
    for (std::size_t i = 0; i < updated.size(); ++i) updated[i] -= lr * g.at(static_cast<std::int64_t>(i));
    next.emplace(name, Tensor(p.shape(), std::move(updated)));
  }
  return next;
}

double finite_diff_check(const LossFn& f, const NamedTensors& params, double eps) {
  if (!(eps > 0.0)) {
    throw DomainError("finite_diff_check: eps must be positive");
  }

  Tape tape;
  NamedTensors tracked = track_params(tape, params);
  const Tensor loss = f(&tape, tracked);
  const NamedTensors analytic = grads_by_name(tape.backward(loss), tracked);

  auto eval_at = [&](const NamedTensors& p) {
    const double v = f(nullptr, p).value();
    if (!std::isfinite(v)) {
      throw NumericsError("finite_diff_check: loss is not finite at a perturbed point");
    }
    return v;
  };

  double worst = 0.0;
  for (const auto& [name, p] : params) {
    const Tensor& grad = analytic.at(name);
    for (std::int64_t i = 0; i < p.size(); ++i) {
      NamedTensors bumped = params;
      std::vector<double> hi(p.data()), lo(p.data());
      hi[static_cast<std::size_t>(i)] += eps;
      lo[static_cast<std::size_t>(i)] -= eps;
      bumped[name] = Tensor(p.shape(), std::move(hi));
      const double f_hi = eval_at(bumped);
      bumped[name] = Tensor(p.shape(), std::move(lo));
      const double f_lo = eval_at(bumped);
      const double numeric = (f_hi - f_lo) / (2.0 * eps);
      const double a = grad.at(i);
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace crowdcast
