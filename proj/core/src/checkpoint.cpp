#include "crowdcast/checkpoint.hpp"

#include <fstream>
#include <json.hpp>

#include "crowdcast/errors.hpp"

namespace crowdcast {

namespace {

constexpr int kVersion = 1;
constexpr const char* kFormat = "crowdcast-checkpoint";

}  // namespace

std::string checkpoint_to_string(const ModelParams& params) {
  nlohmann::json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["config"] = {{"d_e", params.config.d_e},
                 {"d_r", params.config.d_r},
                 {"d_h", params.config.d_h},
                 {"tcn_blocks", params.config.tcn_blocks},
                 {"tcn_kernel", params.config.tcn_kernel},
                 {"extrap_kernel", params.config.extrap_kernel},
                 {"t_obs", params.config.t_obs},
                 {"t_pred", params.config.t_pred},
                 {"tcn_residual", params.config.tcn_residual}};
  nlohmann::json tensors = nlohmann::json::object();
  for (const auto& [name, tensor] : params.values) {
    tensors[name] = {{"shape", tensor.shape()}, {"data", tensor.data()}};
  }
  j["params"] = std::move(tensors);
  return j.dump(1);
}

void save_checkpoint(const std::string& path, const ModelParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out << checkpoint_to_string(params) << '\n';
}

ModelParams checkpoint_from_string(const std::string& text, const std::string& origin_name) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(origin_name + ": not a valid checkpoint: " + e.what());
  }
  if (j.value("format", "") != kFormat) {
    throw ConfigError(origin_name + ": not a " + kFormat + " file");
  }
  if (j.value("version", -1) != kVersion) {
    throw ConfigError(origin_name + ": unsupported checkpoint version");
  }
  ModelParams params;
  const auto& c = j.at("config");
  params.config.d_e = c.at("d_e").get<int>();
  params.config.d_r = c.at("d_r").get<int>();
  params.config.d_h = c.at("d_h").get<int>();
  params.config.tcn_blocks = c.at("tcn_blocks").get<int>();
  params.config.tcn_kernel = c.at("tcn_kernel").get<int>();
  params.config.extrap_kernel = c.at("extrap_kernel").get<int>();
  params.config.t_obs = c.at("t_obs").get<int>();
  params.config.t_pred = c.at("t_pred").get<int>();
  params.config.tcn_residual = c.at("tcn_residual").get<bool>();
  for (const auto& [name, entry] : j.at("params").items()) {
    params.values.emplace(name, Tensor(entry.at("shape").get<Shape>(),
                                       entry.at("data").get<std::vector<double>>()));
  }
  return params;
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return checkpoint_from_string(text, path);
}

}  // namespace crowdcast
