#pragma once

#include <stdexcept>
#include <string>

namespace jlese {

/// Base of every error raised by the library. Each subclass corresponds to
/// one CLI exit code (see exit_code()).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation
/// (e.g. a score outside [0, 100], zero success mass).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Invalid configuration: bad flags, empty grids, malformed schema.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Malformed or incomplete input records.
class DataError : public Error {
public:
  using Error::Error;
};

/// A root finder or optimizer failed to converge.
class SolverError : public Error {
public:
  SolverError(const std::string& what, double lo, double hi)
      : Error(what), bracket_lo(lo), bracket_hi(hi) {}
  double bracket_lo;
  double bracket_hi;
};

/// An objective produced a non-finite value at a grid point.
class EvaluationError : public Error {
public:
  EvaluationError(const std::string& what, double at) : Error(what), point(at) {}
  double point;
};

/// Two independent computations of the same quantity disagreed. Indicates a
/// bug, never bad input.
class InvariantError : public Error {
public:
  using Error::Error;
};

namespace exit_codes {
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kData = 3;
inline constexpr int kSolver = 4;
}  // namespace exit_codes

}  // namespace jlese
