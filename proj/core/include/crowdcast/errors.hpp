#pragma once

#include <stdexcept>
#include <string>

namespace crowdcast {

struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

struct RankError : std::runtime_error {
  explicit RankError(const std::string& what) : std::runtime_error(what) {}
};

struct TapeError : std::runtime_error {
  explicit TapeError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericsError : std::runtime_error {
  explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct DuplicateError : std::runtime_error {
  explicit DuplicateError(const std::string& what) : std::runtime_error(what) {}
};

struct MissingPoseError : std::runtime_error {
  explicit MissingPoseError(const std::string& what) : std::runtime_error(what) {}
};

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace crowdcast
