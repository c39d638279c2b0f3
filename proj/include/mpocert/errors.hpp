#pragma once

#include <stdexcept>
#include <string>

namespace mpocert {

// Base of every error thrown by the library. The CLI maps subclasses onto
// exit codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A letter or index lies outside the domain of a morphism or alphabet.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The caller violated a documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// An enumeration stopped because its candidate budget ran out. This is
/// never a negative answer: the search is inconclusive.
class BudgetExhausted : public Error {
public:
    BudgetExhausted(const std::string& what, unsigned long long used)
        : Error(what), used_(used) {}
    unsigned long long used() const noexcept { return used_; }

private:
    unsigned long long used_;
};

/// A dense object would exceed the configured size cap.
class SizeCapExceeded : public Error {
public:
    using Error::Error;
};

class Unsupported : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

/// Input data that disagrees with itself (e.g. Hankel marginals).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace mpocert
