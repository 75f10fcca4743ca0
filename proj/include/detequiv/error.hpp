#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace detequiv {

enum class Errc {
  DimensionMismatch,
  InvalidEntry,
  SingularMatrix,
  SingularSystem,
  NotPositiveDefinite,
  ConvergenceFailure,
  InvalidSpectralPoint,
  MaxIterExceeded,
  NotSeparable,
  QuadratureFailure,
  InvalidArgument,
  SchemaError,
  IoError,
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidEntry: return "InvalidEntry";
    case Errc::SingularMatrix: return "SingularMatrix";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::ConvergenceFailure: return "ConvergenceFailure";
    case Errc::InvalidSpectralPoint: return "InvalidSpectralPoint";
    case Errc::MaxIterExceeded: return "MaxIterExceeded";
    case Errc::NotSeparable: return "NotSeparable";
    case Errc::QuadratureFailure: return "QuadratureFailure";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::SchemaError: return "SchemaError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

/// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace detequiv
