#pragma once

#include <string>

#include "crowdcast/seqnet.hpp"

namespace crowdcast {

// Versioned JSON checkpoint: model hyperparameters plus a map of
// parameter-name -> { shape, flat float array }. Doubles are written in
// shortest round-trip form, so save -> load is bit-exact and two identical
// runs produce identical bytes.
void save_checkpoint(const std::string& path, const ModelParams& params);
ModelParams load_checkpoint(const std::string& path);

std::string checkpoint_to_string(const ModelParams& params);
ModelParams checkpoint_from_string(const std::string& text, const std::string& origin_name);

}  // namespace crowdcast
