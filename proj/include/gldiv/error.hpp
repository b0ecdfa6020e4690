#pragma once

#include <stdexcept>
#include <string>

namespace gldiv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid construction input: bad curve, degenerate mesh sizes, violated
/// parameter invariants.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// A point or chart coordinate outside the tubular neighbourhood.
class OutOfCollarError : public Error {
 public:
  using Error::Error;
};

/// Chart inversion did not converge.
class InversionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or a failed line search.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A winding contour passes through a defect core (|u| too small).
class DefectOnContourError : public Error {
 public:
  using Error::Error;
};

/// Configuration could not be parsed or validated. `path` names the
/// offending key (JSON-pointer style) when one is known.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace gldiv
