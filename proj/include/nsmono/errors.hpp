#pragma once

#include <stdexcept>
#include <string>

namespace nsmono {

/// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define NSMONO_DEFINE_ERROR(Name)            \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

NSMONO_DEFINE_ERROR(ResolutionError);
NSMONO_DEFINE_ERROR(SingularOriginError);
NSMONO_DEFINE_ERROR(DomainError);
NSMONO_DEFINE_ERROR(ConfigError);
NSMONO_DEFINE_ERROR(EvaluationError);
NSMONO_DEFINE_ERROR(TangencyError);
NSMONO_DEFINE_ERROR(ConvergenceError);
NSMONO_DEFINE_ERROR(DegenerateError);
NSMONO_DEFINE_ERROR(SupportError);
NSMONO_DEFINE_ERROR(PremiseViolated);
NSMONO_DEFINE_ERROR(IoError);

#undef NSMONO_DEFINE_ERROR

}  // namespace nsmono
