#pragma once

#include <functional>
#include <map>
#include <string>

#include "crowdcast/tensor.hpp"

namespace crowdcast {

// Named parameter collection. std::map keeps iteration order deterministic,
// which the reproducibility guarantees rely on.
using NamedTensors = std::map<std::string, Tensor>;

// Registers every parameter as a leaf on `tape`; returns the tracked copies.
NamedTensors track_params(Tape& tape, const NamedTensors& params);

// Translates a gradient map keyed by leaf node id into one keyed by name.
NamedTensors grads_by_name(const GradMap& grads, const NamedTensors& tracked);

// One plain SGD update: p <- p - lr * g. Every parameter must have a
// gradient of identical shape.
NamedTensors sgd_step(const NamedTensors& params, const NamedTensors& grads, double lr);

// Builds a scalar loss from parameters. When `tape` is non-null the params
// passed in are tracked leaves of that tape; when null they are constants.
using LossFn = std::function<Tensor(Tape* tape, const NamedTensors& params)>;

// Compares the analytic gradient of `f` against central finite differences
// (per element, step eps) and returns the worst relative error
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
double finite_diff_check(const LossFn& f, const NamedTensors& params, double eps);

}  // namespace crowdcast
