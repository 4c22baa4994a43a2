// Exception hierarchy shared by every thermoflow module
//
// Each category maps onto one CLI exit code:
//   DomainError, InvalidConfig -> 2 (input validation)
//   SolvabilityError           -> 3 (physics / solvability constraint)
//   NumericalError             -> 4 (internal numerical failure)

#pragma once

#include <stdexcept>
#include <string>

namespace thermoflow {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Structurally invalid device configuration or problem payload.
class InvalidConfig : public Error {
public:
    using Error::Error;
};

// A requested physical/circuit construction has no solution.
class SolvabilityError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace thermoflow
