#pragma once

#include <stdexcept>
#include <string>

namespace mrswme {

/// Invalid numerical state (depth below the floor, non-finite values, ...).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The flux Jacobian has eigenvalues whose imaginary parts exceed the
/// configured fraction of the real spectrum.
class HyperbolicityError : public SolverError {
 public:
  HyperbolicityError(const std::string& what, double ratio)
      : SolverError(what), ratio_(ratio) {}
  double ratio() const { return ratio_; }

 private:
  double ratio_;
};

/// Malformed or out-of-range run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mrswme
