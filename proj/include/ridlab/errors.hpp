#pragma once

#include <stdexcept>
#include <string>

namespace ridlab {

/// Violated function precondition (bad argument, shape mismatch, invalid state).
class PreconditionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid configuration key or value. Carries the offending line when known.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& message, int line = 0);
    int line() const { return line_; }

  private:
    int line_;
};

/// A required input file or stage output is absent or unreadable.
class MissingInputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Non-finite values or another numerical breakdown.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Geometric degeneracy, e.g. symmetry axis parallel to the line of sight.
class DegeneracyError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw PreconditionError(message);
}

}  // namespace ridlab
