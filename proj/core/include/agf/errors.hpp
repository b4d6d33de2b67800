#pragma once

#include <stdexcept>

namespace agf {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, incompatible shapes, or values outside an operation's domain.
class ValidationError : public Error {
public:
  using Error::Error;
};

// File-level failures: unreadable, unrecognized, or inconsistent on-disk data.
class IoError : public Error {
public:
  using Error::Error;
};

// A numeric procedure left its valid regime (e.g. a diverging optimization).
class NumericError : public Error {
public:
  using Error::Error;
};

#define AGF_DEFINE_ERROR(name, base) \
  class name : public base {         \
  public:                            \
    using base::base;                \
  };

AGF_DEFINE_ERROR(ShapeMismatch, ValidationError)
AGF_DEFINE_ERROR(DivisionNearZero, ValidationError)
AGF_DEFINE_ERROR(InvalidDimension, ValidationError)
AGF_DEFINE_ERROR(ValueOutOfRange, ValidationError)
AGF_DEFINE_ERROR(NonPositiveGamma, ValidationError)
AGF_DEFINE_ERROR(RadiusTooLarge, ValidationError)
AGF_DEFINE_ERROR(AttentionOutOfRange, ValidationError)
AGF_DEFINE_ERROR(DegenerateDenominator, ValidationError)
AGF_DEFINE_ERROR(WeightDimensionMismatch, ValidationError)
AGF_DEFINE_ERROR(DimensionMismatch, ValidationError)
AGF_DEFINE_ERROR(NonBinaryInput, ValidationError)
AGF_DEFINE_ERROR(DegenerateLabels, ValidationError)
AGF_DEFINE_ERROR(EmptyUnion, ValidationError)

AGF_DEFINE_ERROR(UnsupportedFormat, IoError)
AGF_DEFINE_ERROR(CorruptHeader, IoError)
AGF_DEFINE_ERROR(TruncatedPayload, IoError)
AGF_DEFINE_ERROR(MissingEntry, IoError)
AGF_DEFINE_ERROR(FileError, IoError)

AGF_DEFINE_ERROR(DivergedLoss, NumericError)

#undef AGF_DEFINE_ERROR

}  // namespace agf
