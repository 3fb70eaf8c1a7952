#pragma once

#include <stdexcept>
#include <string>

namespace brolin {

/// Broad failure classes; the CLI maps each onto its exit code.
enum class ErrorKind { Input, Budget, Numeric, Invariant };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InputError : Error {
  explicit InputError(const std::string& w) : Error(ErrorKind::Input, w) {}
};

// Both homogeneous values vanish, or P and Q share a root.
struct CoprimalityError : Error {
  explicit CoprimalityError(const std::string& w) : Error(ErrorKind::Input, w) {}
};

struct RootConvergenceError : Error {
  explicit RootConvergenceError(const std::string& w) : Error(ErrorKind::Numeric, w) {}
};

struct BudgetExceeded : Error {
  explicit BudgetExceeded(const std::string& w, double best_gap = -1.0)
      : Error(ErrorKind::Budget, w), best_gap(best_gap) {}
  double best_gap;  // negative when not applicable
};

struct ExceptionalPointError : Error {
  explicit ExceptionalPointError(const std::string& w) : Error(ErrorKind::Input, w) {}
};

struct NoValidBallError : Error {
  explicit NoValidBallError(const std::string& w) : Error(ErrorKind::Numeric, w) {}
};

struct NoRepellingPointFound : Error {
  explicit NoRepellingPointFound(const std::string& w) : Error(ErrorKind::Numeric, w) {}
};

struct EmptySetError : Error {
  explicit EmptySetError(const std::string& w) : Error(ErrorKind::Input, w) {}
};

struct WalkBudgetExceeded : Error {
  WalkBudgetExceeded(const std::string& w, long long completed)
      : Error(ErrorKind::Budget, w), completed(completed) {}
  long long completed;
};

struct GeometryUnderflowError : Error {
  explicit GeometryUnderflowError(const std::string& w) : Error(ErrorKind::Input, w) {}
};

}  // namespace brolin
