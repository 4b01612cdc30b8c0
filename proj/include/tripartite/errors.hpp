#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tripartite {

/// Base class for every error raised by the library. `exit_code()` is the
/// process exit status the CLI reports for it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return 1; }
};

/// Invalid argument outside the mathematical domain of an operation
/// (negative index, non-positive coupling, unnormalized input, ...).
class DomainError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
};

/// A Fock index lies outside the truncated lattice, or a lattice is too small
/// for the dynamics requested on it.
class CutoffViolation : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
};

/// Probability mass discarded by a cutoff exceeds the tolerance. Carries the
/// smallest cutoff that would satisfy it.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, std::string mode, int required_cutoff)
      : Error(what), mode_(std::move(mode)), required_cutoff_(required_cutoff) {}
  const std::string& mode() const { return mode_; }
  int required_cutoff() const { return required_cutoff_; }
  int exit_code() const override { return 2; }

 private:
  std::string mode_;
  int required_cutoff_;
};

/// The requested measurement outcome has zero weight on the state.
class HeraldImpossible : public Error {
 public:
  explicit HeraldImpossible(const std::string& what) : Error(what) {}
  double raw_norm() const { return 0.0; }
  int exit_code() const override { return 4; }
};

/// Memory or lattice-size budget exceeded before any compute is attempted.
class SizeError : public Error {
 public:
  SizeError(const std::string& what, std::size_t requested, std::size_t limit)
      : Error(what), requested_(requested), limit_(limit) {}
  std::size_t requested() const { return requested_; }
  std::size_t limit() const { return limit_; }
  int exit_code() const override { return 3; }

 private:
  std::size_t requested_;
  std::size_t limit_;
};

/// Adaptive integrator step size collapsed.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double gamma_dt)
      : Error(what), gamma_dt_(gamma_dt) {}
  double gamma_dt() const { return gamma_dt_; }
  int exit_code() const override { return 4; }

 private:
  double gamma_dt_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 4; }
};

/// Aggregated configuration problems. Every message is anchored to a line of
/// the source document when one is known.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }
  int exit_code() const override { return 2; }

 private:
  std::vector<std::string> problems_;
};

}  // namespace tripartite
