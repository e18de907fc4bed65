#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace rqlab {

// Real numbers in error messages; std::to_string would print 1e-8 as 0.000000.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Broad failure class; the CLI maps it onto an exit status.
enum class ErrorClass { numerical, validation, io };

/// Base of every error raised by the library. `kind()` is a stable,
/// machine-readable name that ends up in the CLI's error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what, ErrorClass cls = ErrorClass::numerical)
      : std::runtime_error(what), kind_(std::move(kind)), class_(cls) {}

  const std::string& kind() const noexcept { return kind_; }
  ErrorClass error_class() const noexcept { return class_; }

 private:
  std::string kind_;
  ErrorClass class_;
};

#define RQLAB_DEFINE_ERROR(Name, Class)                                       \
  class Name : public Error {                                                 \
   public:                                                                    \
    explicit Name(const std::string& what) : Error(#Name, what, Class) {}     \
  };

// Density fell below the vacuum floor; phase and quantum terms are undefined.
RQLAB_DEFINE_ERROR(VacuumError, ErrorClass::numerical)
// Poisson data with nonzero mean on the torus.
RQLAB_DEFINE_ERROR(CompatibilityError, ErrorClass::numerical)
RQLAB_DEFINE_ERROR(DegenerateParameterError, ErrorClass::numerical)
RQLAB_DEFINE_ERROR(StabilityError, ErrorClass::numerical)
RQLAB_DEFINE_ERROR(PreconditionError, ErrorClass::numerical)
RQLAB_DEFINE_ERROR(IrrotationalityError, ErrorClass::numerical)
RQLAB_DEFINE_ERROR(DomainError, ErrorClass::numerical)
RQLAB_DEFINE_ERROR(IndexError, ErrorClass::numerical)
RQLAB_DEFINE_ERROR(StudyError, ErrorClass::numerical)
RQLAB_DEFINE_ERROR(FitError, ErrorClass::numerical)
RQLAB_DEFINE_ERROR(ParseError, ErrorClass::validation)
RQLAB_DEFINE_ERROR(ValidationError, ErrorClass::validation)
RQLAB_DEFINE_ERROR(IoError, ErrorClass::io)

#undef RQLAB_DEFINE_ERROR

}  // namespace rqlab
