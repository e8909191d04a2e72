#pragma once

#include <stdexcept>
#include <string>

namespace fbrk {

/// Input outside the domain of an operation (bad parameters, wrong mean flow, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure failed: divergence, blow-up, iteration cap.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class IncompatibilityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InstabilityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace fbrk
