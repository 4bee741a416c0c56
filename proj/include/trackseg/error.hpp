#pragma once

#include <stdexcept>
#include <string>

namespace trackseg {

// Base class for every error raised by the library. Callers that only care
// about "did it fail" catch this; the subclasses exist for tests and for the
// CLI's diagnostics.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition on an argument was violated (bad box, mismatched sizes, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// On-disk data is missing, malformed or inconsistent.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace trackseg
