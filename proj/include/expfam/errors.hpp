#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace expfam {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A parameter lies outside the open domain of its space, or an
/// observation lies outside the support of the family.
class DomainError : public Error {
public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

/// Input data is unusable: empty sample, degenerate sample (observed
/// point on the domain boundary), malformed file contents.
class DataError : public Error {
public:
  explicit DataError(const std::string& what) : Error(what) {}
};

/// File or text could not be parsed.
class ParseError : public Error {
public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

/// An iterative numerical procedure failed to converge. Carries the
/// best estimate available at the point of failure.
class NumericalError : public Error {
public:
  NumericalError(const std::string& what, std::vector<double> partial)
      : Error(what), partial_estimate(std::move(partial)) {}
  explicit NumericalError(const std::string& what) : Error(what) {}

  std::vector<double> partial_estimate;
};

}  // namespace expfam
