#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace whmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

// Error categories map onto process exit codes at the CLI boundary.
enum class ErrorCode : int {
  usage = 1,
  config = 2,
  numerical = 3,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_config(const std::string& msg) {
  throw Error(ErrorCode::config, msg);
}

[[noreturn]] inline void throw_numerical(const std::string& msg) {
  throw Error(ErrorCode::numerical, msg);
}

[[noreturn]] inline void throw_usage(const std::string& msg) {
  throw Error(ErrorCode::usage, msg);
}

// The four discounted first-passage functionals.
enum class FunctionalKind { pi_plus, psi_plus, pi_minus, psi_minus };

inline const char* to_string(FunctionalKind k) {
  switch (k) {
    case FunctionalKind::pi_plus: return "Pi+";
    case FunctionalKind::psi_plus: return "Psi+";
    case FunctionalKind::pi_minus: return "Pi-";
    case FunctionalKind::psi_minus: return "Psi-";
  }
  return "?";
}

}  // namespace whmc
