#pragma once

#include <stdexcept>
#include <string>

namespace immreg {

/// Base class for every failure raised by the library. `kind()` is the short
/// machine-readable tag written into CLI error records.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error("shape_mismatch", w) {}
};

struct RegularityError : Error {
  explicit RegularityError(const std::string& w) : Error("immersion_regularity", w) {}
};

struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& w) : Error("non_convergence", w) {}
};

struct GaugeError : Error {
  explicit GaugeError(const std::string& w) : Error("gauge_projection", w) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error("domain", w) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error("config", w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error("io", w) {}
};

}  // namespace immreg
