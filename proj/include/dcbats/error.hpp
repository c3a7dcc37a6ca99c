#pragma once

#include <stdexcept>
#include <string>

namespace dcbats {

// Base of every error raised by the library. Subclasses name the failure kind.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DCBATS_DEFINE_ERROR(Name)          \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  };

DCBATS_DEFINE_ERROR(DivisibilityError)
DCBATS_DEFINE_ERROR(DomainError)
DCBATS_DEFINE_ERROR(IndexError)
DCBATS_DEFINE_ERROR(DimensionError)
DCBATS_DEFINE_ERROR(SupportError)
DCBATS_DEFINE_ERROR(NonPositiveVarianceError)
DCBATS_DEFINE_ERROR(CovariateError)
DCBATS_DEFINE_ERROR(InitializationError)
DCBATS_DEFINE_ERROR(NonFiniteError)
DCBATS_DEFINE_ERROR(EmptyInputError)
DCBATS_DEFINE_ERROR(LengthMismatchError)
DCBATS_DEFINE_ERROR(SpaceMismatchError)
DCBATS_DEFINE_ERROR(ZeroVarianceError)
DCBATS_DEFINE_ERROR(ParseError)
DCBATS_DEFINE_ERROR(MissingValueError)
DCBATS_DEFINE_ERROR(ConfigError)
DCBATS_DEFINE_ERROR(IoError)

#undef DCBATS_DEFINE_ERROR

}  // namespace dcbats
