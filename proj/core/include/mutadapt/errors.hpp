#pragma once

#include <stdexcept>
#include <string>

namespace mutadapt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation was applied outside its domain (e.g. stepping a terminal state).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A configuration, model, policy or trace failed validation.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The observed transition has zero probability under the current belief.
class InconsistentObservation : public Error {
public:
    using Error::Error;
};

/// An estimator was asked for a value without any supporting events.
class NoEvidence : public Error {
public:
    using Error::Error;
};

class NotFound : public Error {
public:
    using Error::Error;
};

class Conflict : public Error {
public:
    using Error::Error;
};

}  // namespace mutadapt
