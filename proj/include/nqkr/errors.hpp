#pragma once

#include <stdexcept>
#include <string>

namespace nqkr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or mismatched inputs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The state lost all weight or a value overflowed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Too few usable points for a fit, or the fitted model is unphysical.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Failure inside an evolution run, tagged with the kick at which it happened.
class EvolutionError : public Error {
 public:
  EvolutionError(int kick, const std::string& what)
      : Error("kick " + std::to_string(kick) + ": " + what), kick_(kick) {}
  int kick() const noexcept { return kick_; }

 private:
  int kick_;
};

}  // namespace nqkr
