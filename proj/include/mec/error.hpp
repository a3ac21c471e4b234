#pragma once

#include <stdexcept>
#include <string>

namespace mec {

// Every error raised by the library derives from Error so callers (the CLI in
// particular) can catch one type and still tell the kinds apart.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidConfig : public Error {
  public:
    using Error::Error;
};

// Argument outside the mathematical domain of an operation (log of zero, k_i = 0, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

class NoConvergence : public Error {
  public:
    using Error::Error;
};

class Infeasible : public Error {
  public:
    using Error::Error;
};

// Combinatorial instance too large for an exhaustive routine.
class GuardError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace mec
