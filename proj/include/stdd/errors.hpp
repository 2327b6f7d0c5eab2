#ifndef STDD_ERRORS_HPP
#define STDD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace stdd {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad mesh/decomposition/model/scheme parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value showed up in an input or an evaluated quantity.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Two objects that must agree (grids, sizes) do not.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Newton or linear solver failure. Carries the worst residual seen.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double worst_residual)
      : Error(what), worst_residual_(worst_residual) {}

  double worst_residual() const { return worst_residual_; }

 private:
  double worst_residual_;
};

/// Reading or writing an experiment artifact failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace stdd

#endif  // STDD_ERRORS_HPP
