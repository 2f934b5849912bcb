#pragma once

#include <stdexcept>
#include <string>

namespace dimervar {

// Validation errors map to CLI exit code 2, numeric failures to exit code 3.
enum class ErrorKind { validation, numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), kind_(kind), name_(std::move(name)) {}
  ErrorKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

 private:
  ErrorKind kind_;
  std::string name_;
};

#define DIMERVAR_ERROR(Name, Kind)                                            \
  struct Name : Error {                                                       \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, #Name, what) {} \
  };

DIMERVAR_ERROR(InvalidRegion, validation)
DIMERVAR_ERROR(InvalidHeight, validation)
DIMERVAR_ERROR(InvalidTiling, validation)
DIMERVAR_ERROR(NotExtendable, validation)
DIMERVAR_ERROR(BaseMismatch, validation)
DIMERVAR_ERROR(CapExceeded, validation)
DIMERVAR_ERROR(InvalidWeights, validation)
DIMERVAR_ERROR(TiltOutOfRange, validation)
DIMERVAR_ERROR(DegenerateWeights, validation)
DIMERVAR_ERROR(ParityViolation, validation)
DIMERVAR_ERROR(ConfigOverlap, validation)
DIMERVAR_ERROR(InfeasibleBoundary, validation)
DIMERVAR_ERROR(QuadratureFailure, numeric)
DIMERVAR_ERROR(NumericOverflow, numeric)
DIMERVAR_ERROR(NonConvergence, numeric)
DIMERVAR_ERROR(NonCoalescence, numeric)

#undef DIMERVAR_ERROR

}  // namespace dimervar
