#pragma once

#include <stdexcept>
#include <string>

namespace relcrawl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two particles closer than the minimum admissible distance.
class DegenerateConfiguration : public Error {
 public:
  using Error::Error;
};

class ScheduleDomain : public Error {
 public:
  using Error::Error;
};

/// A point lies outside the domain of a quotient chart (branch or triangle
/// inequality failure).
class ChartDomain : public Error {
 public:
  using Error::Error;
};

class StepSizeUnderflow : public Error {
 public:
  using Error::Error;
};

class OutOfSpan : public Error {
 public:
  using Error::Error;
};

class ContinuationFailed : public Error {
 public:
  using Error::Error;
};

/// Model assumptions (non-degenerate rest shape, sufficient stiffness) fail.
class AssumptionViolated : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class SingularPeriodMap : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace relcrawl
