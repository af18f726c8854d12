#include "dvar/error.hpp"

namespace dvar {

int exit_code(ErrorClass cls) noexcept {
  switch (cls) {
    case ErrorClass::config:
      return 2;
    case ErrorClass::data:
      return 3;
    case ErrorClass::fit_quality:
      return 4;
    case ErrorClass::bootstrap_quality:
      return 5;
    case ErrorClass::internal:
      break;
  }
  return 1;
}

}  // namespace dvar
