#pragma once

#include <stdexcept>
#include <string>

namespace ranemu {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input files that cannot be interpreted at all (bad header, bad scenario line).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Caller supplied an out-of-range argument.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// KDE draws keep landing outside the positive octant.
class PathologicalModelError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

class CorruptModelError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

}  // namespace ranemu
