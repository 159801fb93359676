#pragma once

#include <stdexcept>
#include <string>

namespace openness {

/// Bad argument: wrong dimension, nonpositive radius, even exponent where an
/// odd one is required, and so on.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unknown built-in system or closed-loop name.
class CatalogError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Descriptor text that is not valid JSON or does not match the schema.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A well-formed system that violates a modelling invariant (f(0,0) != 0).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A request whose discretisation would not fit in memory or time budgets.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A radius outside the span covered by a rate table.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Power-law fit on data that cannot be log-transformed.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometry pipeline invariant broken; indicates a bug, not bad input.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace openness
