#include "crowdcast/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "crowdcast/errors.hpp"

namespace crowdcast {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

int to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected integer, got '" + value + "'");
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected number, got '" + value + "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
}

const std::set<std::string> kModelKeys{"d_e",          "d_r",        "d_h",
                                       "tcn_blocks",   "tcn_kernel", "extrap_kernel",
                                       "t_obs",        "t_pred",     "tcn_residual"};
const std::set<std::string> kTrainKeys{"lr",       "batch_size", "epochs", "seed",
                                       "val_fraction", "lr_decay", "grad_clip"};

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin_name) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string entry = trim(line);
    if (entry.empty()) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw ParseError(origin_name + ": line " + std::to_string(line_no) + ": expected `key = value`");
    }
    const std::string key = trim(entry.substr(0, eq));
    const std::string value = trim(entry.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ParseError(origin_name + ": line " + std::to_string(line_no) + ": expected `key = value`");
    }
    if (cfg.entries.count(key)) {
      throw DuplicateError(origin_name + ": duplicate key '" + key + "'");
    }
    cfg.entries[key] = value;
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(text, path);
}

void ConfigFile::apply(ModelConfig* model) const {
  for (const auto& [key, value] : entries) {
    if (key == "d_e") model->d_e = to_int(key, value);
    else if (key == "d_r") model->d_r = to_int(key, value);
    else if (key == "d_h") model->d_h = to_int(key, value);
    else if (key == "tcn_blocks") model->tcn_blocks = to_int(key, value);
    else if (key == "tcn_kernel") model->tcn_kernel = to_int(key, value);
    else if (key == "extrap_kernel") model->extrap_kernel = to_int(key, value);
    else if (key == "t_obs") model->t_obs = to_int(key, value);
    else if (key == "t_pred") model->t_pred = to_int(key, value);
    else if (key == "tcn_residual") model->tcn_residual = to_bool(key, value);
  }
  if (model->t_obs < 2 || model->t_pred < 1 || model->tcn_kernel % 2 == 0 ||
      model->extrap_kernel % 2 == 0 || model->tcn_blocks < 1 || model->d_e < 2 ||
      model->d_e % 2 != 0) {
    throw ConfigError("invalid model configuration (t_obs >= 2, t_pred >= 1, odd kernels, even d_e)");
  }
}

void ConfigFile::apply(TrainConfig* train) const {
  for (const auto& [key, value] : entries) {
    if (key == "lr") train->lr = to_double(key, value);
    else if (key == "batch_size") train->batch_size = to_int(key, value);
    else if (key == "epochs") train->epochs = to_int(key, value);
    else if (key == "seed") train->seed = static_cast<std::uint64_t>(to_int(key, value));
    else if (key == "val_fraction") train->val_fraction = to_double(key, value);
    else if (key == "lr_decay") train->lr_decay = to_double(key, value);
    else if (key == "grad_clip") train->grad_clip = to_double(key, value);
  }
  if (train->lr < 0.0 || train->batch_size < 1 || train->epochs < 1 ||
      train->val_fraction < 0.0 || train->val_fraction >= 1.0 || train->grad_clip < 0.0) {
    throw ConfigError("invalid training configuration (lr > 0, batch >= 1, epochs >= 1)");
  }
}

void ConfigFile::check_known() const {
  for (const auto& [key, value] : entries) {
    if (!kModelKeys.count(key) && !kTrainKeys.count(key)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

}  // namespace crowdcast
