#pragma once

#include <stdexcept>
#include <string>

namespace radpair {

// Root of every exception the engine throws. The CLI maps NumericalFailure
// subclasses to exit status 3 and InputError subclasses to exit status 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

#define RADPAIR_DEFINE_ERROR(Name, Base) \
  class Name : public Base {             \
   public:                               \
    using Base::Base;                    \
  }

RADPAIR_DEFINE_ERROR(UnsupportedSpin, InputError);
RADPAIR_DEFINE_ERROR(ShapeError, InputError);
RADPAIR_DEFINE_ERROR(InvalidAxis, InputError);
RADPAIR_DEFINE_ERROR(InvalidTensor, InputError);
RADPAIR_DEFINE_ERROR(InvalidHamiltonian, InputError);
RADPAIR_DEFINE_ERROR(InvalidArgument, InputError);
RADPAIR_DEFINE_ERROR(InvalidModel, InputError);
RADPAIR_DEFINE_ERROR(StepSizeError, InputError);
RADPAIR_DEFINE_ERROR(OracleScopeError, InputError);
RADPAIR_DEFINE_ERROR(ProtocolShapeError, InputError);
RADPAIR_DEFINE_ERROR(EmptyResult, InputError);

RADPAIR_DEFINE_ERROR(NumericalError, NumericalFailure);
RADPAIR_DEFINE_ERROR(NoConvergence, NumericalFailure);
RADPAIR_DEFINE_ERROR(DivisionDomain, NumericalFailure);
RADPAIR_DEFINE_ERROR(FitError, NumericalFailure);

#undef RADPAIR_DEFINE_ERROR

}  // namespace radpair
