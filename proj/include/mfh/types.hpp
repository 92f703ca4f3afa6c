#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mfh {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixSeq = std::vector<Matrix>;
using VectorSeq = std::vector<Vector>;

/// Positivity operators checked by the backward recursions.
///   kH    gamma^2 I + B'PB + D'PD                 (deviation, disturbance)
///   kHt   gamma^2 I + Bbb'Q Bbb + Dbb'P Dbb       (mean, disturbance)
///   kH1   I + F1'Pt F1                            (deviation, control)
///   kHt1  I + F1'Qt F1                            (mean, control)
enum class Operator { kH, kHt, kH1, kHt1 };

const char* to_string(Operator op);

/// The recursion could not proceed because an operator lost positive
/// definiteness. This is an expected outcome, not a programming error.
struct FeasibilityFailure {
  int step = 0;
  Operator which = Operator::kH;
  double min_eigenvalue = 0.0;

  std::string describe() const;
};

/// Either a value or a feasibility failure.
template <typename T>
class Outcome {
 public:
  Outcome(T value) : state_(std::move(value)) {}
  Outcome(FeasibilityFailure failure) : state_(std::move(failure)) {}

  bool ok() const { return std::holds_alternative<T>(state_); }
  explicit operator bool() const { return ok(); }

  const T& value() const& {
    if (!ok()) throw std::logic_error("Outcome holds a failure: " + failure().describe());
    return std::get<T>(state_);
  }
  T&& value() && {
    if (!ok()) throw std::logic_error("Outcome holds a failure: " + failure().describe());
    return std::get<T>(std::move(state_));
  }
  const T& operator*() const& { return value(); }
  const T* operator->() const { return &value(); }

  const FeasibilityFailure& failure() const {
    if (ok()) throw std::logic_error("Outcome holds a value");
    return std::get<FeasibilityFailure>(state_);
  }

 private:
  std::variant<T, FeasibilityFailure> state_;
};

/// Input shape does not match the declared dimensions.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed serialized document. `path()` names the offending field,
/// e.g. "stages[1].D".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// The stacked gain system of a coupled step is numerically singular.
class SingularCouplingError : public std::runtime_error {
 public:
  SingularCouplingError(int step, double rcond);
  int step() const { return step_; }
  double rcond() const { return rcond_; }

 private:
  int step_;
  double rcond_;
};

}  // namespace mfh
