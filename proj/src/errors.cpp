#include "ridlab/errors.hpp"

namespace ridlab {

ConfigError::ConfigError(const std::string& message, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

}  // namespace ridlab
