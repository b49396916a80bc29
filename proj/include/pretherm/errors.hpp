#pragma once

#include <stdexcept>
#include <string>

namespace pretherm {

/// Machine-readable failure category. The CLI maps each to a distinct exit code.
enum class ErrorCategory {
  argument = 2,
  config = 3,
  solver_failure = 10,
  zigzag_instability = 11,
  beatnote_resonance = 12,
  fit = 13,
  normalization = 14,
  numerical = 15,
  size = 16,
  stiffness = 17,
  io = 20,
  validation = 30,
};

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::argument: return "argument";
    case ErrorCategory::config: return "config";
    case ErrorCategory::solver_failure: return "solver_failure";
    case ErrorCategory::zigzag_instability: return "zigzag_instability";
    case ErrorCategory::beatnote_resonance: return "beatnote_resonance";
    case ErrorCategory::fit: return "fit";
    case ErrorCategory::normalization: return "normalization";
    case ErrorCategory::numerical: return "numerical";
    case ErrorCategory::size: return "size";
    case ErrorCategory::stiffness: return "stiffness";
    case ErrorCategory::io: return "io";
    case ErrorCategory::validation: return "validation";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

/// Equilibrium solver ran out of iterations; carries the last residual.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, double residual)
      : Error(ErrorCategory::solver_failure, what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class ZigzagInstability : public Error {
 public:
  ZigzagInstability(const std::string& what, double min_eigenvalue)
      : Error(ErrorCategory::zigzag_instability, what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class BeatnoteResonance : public Error {
 public:
  BeatnoteResonance(const std::string& what, double detuning)
      : Error(ErrorCategory::beatnote_resonance, what), detuning_(detuning) {}
  double detuning() const noexcept { return detuning_; }

 private:
  double detuning_;
};

#define PRETHERM_SIMPLE_ERROR(Name, Cat)                                        \
  class Name : public Error {                                                   \
   public:                                                                      \
    explicit Name(const std::string& what) : Error(ErrorCategory::Cat, what) {} \
  };

PRETHERM_SIMPLE_ERROR(ArgumentError, argument)
PRETHERM_SIMPLE_ERROR(ConfigError, config)
PRETHERM_SIMPLE_ERROR(FitError, fit)
PRETHERM_SIMPLE_ERROR(NormalizationError, normalization)
PRETHERM_SIMPLE_ERROR(NumericalError, numerical)
PRETHERM_SIMPLE_ERROR(SizeError, size)
PRETHERM_SIMPLE_ERROR(StiffnessError, stiffness)
PRETHERM_SIMPLE_ERROR(IoError, io)
PRETHERM_SIMPLE_ERROR(ValidationError, validation)

#undef PRETHERM_SIMPLE_ERROR

}  // namespace pretherm
