#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cqed {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed model, inconsistent basis, invalid parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A state would need more photons in a mode than the configured cutoff.
class FockOverflowError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The computation itself failed (singular block, integrator breakdown, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Largest |H - H^dagger| entry.
inline double hermiticity_error(const Matrix& h) {
  if (h.size() == 0) return 0.0;
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace cqed
