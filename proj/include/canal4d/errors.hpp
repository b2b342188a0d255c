#pragma once

#include <stdexcept>
#include <string>

namespace canal4d {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside its admissible domain (interval, validity s + r'^2 > 0, r > 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A construction degenerated: near-singular Gram matrix, null normal, singular metric.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Closed-form curvature denominator vanishes (singular point of the parametrization).
class SingularPointError : public Error {
 public:
  using Error::Error;
};

/// Shape operator has a complex eigenvalue pair beyond tolerance.
class SpectralError : public Error {
 public:
  using Error::Error;
};

}  // namespace canal4d
