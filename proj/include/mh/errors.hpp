#ifndef MH_ERRORS_HPP
#define MH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mh {

// Common base so callers can catch every library failure in one handler.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A point lies outside the domain an operation requires (regularizer domain,
// positivity constraints of the log Hamiltonian, eta/L restrictions).
struct DomainViolation : Error {
  using Error::Error;
};

// A derivative or value oracle returned a non-finite number.
struct OracleFailure : Error {
  using Error::Error;
};

// A derivative of higher order than the family provides was requested.
struct OracleOrderExceeded : Error {
  using Error::Error;
};

// Payoff matrix is not real-diagonalizable; the symmetric-factor construction
// is restricted to that class.
struct DecompositionUnavailable : Error {
  using Error::Error;
};

struct ImplicitSolveFailed : Error {
  double residual;
  int iterations;
  ImplicitSolveFailed(const std::string& msg, double res, int iters)
      : Error(msg), residual(res), iterations(iters) {}
};

// Linear maximization over an unconstrained strategy domain is ill-posed.
struct UnboundedDomain : Error {
  using Error::Error;
};

// Quadratic closed form evaluated outside sigma_max(BC) * eta^2 < 1.
struct ConvergenceRadiusExceeded : Error {
  using Error::Error;
};

struct NonRealSpectrum : Error {
  using Error::Error;
};

// The matrix-log series of the integral form requires ||M(t) - I|| < 1.
struct OperatorNormTooLarge : Error {
  using Error::Error;
};

struct QuadratureFailure : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

// A verification was asked for more than the configured resource budget
// allows; partial results may still have been emitted.
struct ResourceBudgetExceeded : Error {
  using Error::Error;
};

}  // namespace mh

#endif  // MH_ERRORS_HPP
