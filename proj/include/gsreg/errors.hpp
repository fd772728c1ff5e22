#pragma once

#include <stdexcept>
#include <string>

namespace gsreg {

// Base for everything thrown by this library. `name()` is the stable,
// machine-readable identifier printed by the CLI; `what()` carries detail.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& msg)
        : std::runtime_error(name + ": " + msg), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

// Bad user input: files, flags, parameter domains. CLI exit code 2.
class InputError : public Error {
    using Error::Error;
};

// Numerical failure on otherwise well-formed input. CLI exit code 3.
class NumericalError : public Error {
    using Error::Error;
};

#define GSREG_DEFINE_ERROR(Name, Base)                       \
    class Name : public Base {                               \
    public:                                                  \
        explicit Name(const std::string& msg)                \
            : Base(#Name, msg) {}                            \
    }

GSREG_DEFINE_ERROR(RankDeficient, NumericalError);
GSREG_DEFINE_ERROR(SingularMatrix, NumericalError);
GSREG_DEFINE_ERROR(ZeroCoefficients, NumericalError);
GSREG_DEFINE_ERROR(DegenerateDirection, NumericalError);
GSREG_DEFINE_ERROR(UndefinedDelta, NumericalError);

GSREG_DEFINE_ERROR(InvalidDf, InputError);
GSREG_DEFINE_ERROR(InvalidProbability, InputError);
GSREG_DEFINE_ERROR(NotCentered, InputError);
GSREG_DEFINE_ERROR(NegativeRidge, InputError);
GSREG_DEFINE_ERROR(InvalidDelta, InputError);
GSREG_DEFINE_ERROR(SameSignViolation, InputError);
GSREG_DEFINE_ERROR(InvalidScenario, InputError);
GSREG_DEFINE_ERROR(MissingColumn, InputError);
GSREG_DEFINE_ERROR(NonNumericCell, InputError);
GSREG_DEFINE_ERROR(MissingValue, InputError);
GSREG_DEFINE_ERROR(EmptyData, InputError);

#undef GSREG_DEFINE_ERROR

} // namespace gsreg
