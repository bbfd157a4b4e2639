#pragma once

#include <stdexcept>
#include <string>

namespace crpnet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A structural invariant of the network data is violated.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Interarrival draw requested for a buffer with zero arrival rate.
class ZeroRateError : public Error {
 public:
  using Error::Error;
};

// The static planning LP has no feasible point.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// The static planning LP has (or may have) an alternate optimum.
class NonUniqueError : public Error {
 public:
  using Error::Error;
};

// The dual system is rank deficient beyond its normalization, or the
// solution fails strict positivity.
class DegenerateDualError : public Error {
 public:
  using Error::Error;
};

// The policy matrix is singular; signals an upstream assumption failure.
class SingularError : public Error {
 public:
  using Error::Error;
};

class Eps2RangeError : public Error {
 public:
  using Error::Error;
};

// A case-1 plan was requested for a state outside the target ball.
class OutOfBallError : public Error {
 public:
  using Error::Error;
};

// The trajectory is too short for the requested scaling window.
class HorizonError : public Error {
 public:
  using Error::Error;
};

// The trajectory lacks the per-period records a diagnostic needs.
class MissingDetailError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// A sandwich-check input violates one of its stated preconditions.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace crpnet
