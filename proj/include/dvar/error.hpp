#pragma once

#include <stdexcept>
#include <string>

namespace dvar {

/// Broad failure class; the CLI maps each class to an exit code.
enum class ErrorClass { config, data, fit_quality, bootstrap_quality, internal };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& name, const std::string& detail)
      : std::runtime_error(name + ": " + detail), cls_(cls), detail_(detail) {}
  ErrorClass error_class() const noexcept { return cls_; }
  /// The message without the class-name prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorClass cls_;
  std::string detail_;
};

#define DVAR_DEFINE_ERROR(Name, Class)                                     \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(Class, #Name, what) {}    \
  }

DVAR_DEFINE_ERROR(IngestError, ErrorClass::data);
DVAR_DEFINE_ERROR(AggregationError, ErrorClass::data);
DVAR_DEFINE_ERROR(InsufficientDataError, ErrorClass::data);
DVAR_DEFINE_ERROR(NumericError, ErrorClass::internal);
DVAR_DEFINE_ERROR(ShapeError, ErrorClass::internal);
DVAR_DEFINE_ERROR(GridError, ErrorClass::data);
DVAR_DEFINE_ERROR(FitQualityError, ErrorClass::fit_quality);
DVAR_DEFINE_ERROR(SpecError, ErrorClass::config);
DVAR_DEFINE_ERROR(MissingHorizonError, ErrorClass::config);
DVAR_DEFINE_ERROR(CorrelationError, ErrorClass::internal);
DVAR_DEFINE_ERROR(PlanError, ErrorClass::config);
DVAR_DEFINE_ERROR(BootstrapQualityError, ErrorClass::bootstrap_quality);
DVAR_DEFINE_ERROR(ConfigError, ErrorClass::config);

#undef DVAR_DEFINE_ERROR

/// Process exit code for an error class: 2 config, 3 data, 4 fit quality,
/// 5 bootstrap quality, 1 anything else.
int exit_code(ErrorClass cls) noexcept;

}  // namespace dvar
