#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace stapgate {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;

/// Dense operator on a HilbertSpace (or on one of its subspace views).
using Operator = Matrix;

inline constexpr double kPi = 3.14159265358979323846;

/// Argument outside an operation's domain (time outside [0, t_f], ε ≤ 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// cot γ blows up in the inverse-engineered pulses.
class SingularityError : public DomainError {
 public:
  SingularityError(const std::string& what, double time)
      : DomainError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Integrator drifted beyond its accuracy contract.
class AccuracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cluster gates applied to sites holding levels outside the stage's span.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace stapgate
