#pragma once

#include <stdexcept>
#include <string>

namespace claw {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct UnknownFlux : Error {
  explicit UnknownFlux(const std::string& name) : Error("unknown flux: " + name) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error("domain error: " + msg) {}
};

struct UnboundedNorm : Error {
  explicit UnboundedNorm(const std::string& msg) : Error("unbounded norm: " + msg) {}
};

struct ZeroShift : Error {
  ZeroShift() : Error("delta quotient undefined at k = 0; use eval_df") {}
  explicit ZeroShift(const std::string& msg) : Error(msg) {}
};

struct NotControllable : Error {
  explicit NotControllable(const std::string& msg) : Error("not controllable: " + msg) {}
};

struct BranchUndetermined : Error {
  explicit BranchUndetermined(const std::string& msg) : Error("argsup branch undetermined: " + msg) {}
};

struct ExtensionInfeasible : Error {
  explicit ExtensionInfeasible(const std::string& msg) : Error("extension infeasible: " + msg) {}
};

struct OneSidedViolation : Error {
  explicit OneSidedViolation(const std::string& msg) : Error("one-sided condition violated: " + msg) {}
};

struct FeasibilityError : Error {
  explicit FeasibilityError(const std::string& msg) : Error("synthesis infeasible: " + msg) {}
};

struct H2Violation : Error {
  explicit H2Violation(const std::string& msg) : Error("growth condition violated: " + msg) {}
};

struct BlowUp : Error {
  double t;
  double x0;
  BlowUp(double t_, double x0_)
      : Error("gradient blow-up at t=" + std::to_string(t_) + ", foot x0=" + std::to_string(x0_)),
        t(t_), x0(x0_) {}
};

struct WindowTooSmall : Error {
  explicit WindowTooSmall(const std::string& msg) : Error("computational window too small: " + msg) {}
};

struct CertificateViolation : Error {
  explicit CertificateViolation(const std::string& msg) : Error("certificate bound violated: " + msg) {}
};

struct StepFailure : Error {
  explicit StepFailure(const std::string& msg) : Error("time step failure: " + msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error("scenario config: " + msg) {}
};

}  // namespace claw
