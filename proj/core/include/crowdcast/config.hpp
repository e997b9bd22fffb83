#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "crowdcast/seqnet.hpp"

namespace crowdcast {

// Training protocol knobs. The 250-epoch value is the full published
// protocol; 30 epochs is the desk-scale default.
struct TrainConfig {
  double lr = 0.01;
  int batch_size = 64;
  int epochs = 30;
  std::uint64_t seed = 1;
  double val_fraction = 0.2;
  double lr_decay = 0.0;   // per-epoch 1/(1+decay*epoch) schedule; 0 keeps lr constant
  double grad_clip = 5.0;  // global gradient-norm cap before each step; 0 disables
};

// Plain-text `key = value` configuration (# comments allowed). Unknown keys
// are rejected so typos surface instead of silently using defaults.
struct ConfigFile {
  std::map<std::string, std::string> entries;

  static ConfigFile parse(const std::string& text, const std::string& origin_name);
  static ConfigFile load(const std::string& path);

  void apply(ModelConfig* model) const;
  void apply(TrainConfig* train) const;
  // Keys consumed by neither struct raise ConfigError.
  void check_known() const;
};

}  // namespace crowdcast
