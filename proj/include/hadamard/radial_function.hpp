#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hadamard {

enum class Monotonicity { increasing, decreasing, none };
enum class FunctionKind { analytic, sampled };

std::string to_string(Monotonicity m);
Monotonicity monotonicity_from_string(const std::string& s);

// A nonnegative function of the radial distance t >= 0. Cheap to copy, immutable.
class RadialFunction {
 public:
  using Fn = std::function<double(double)>;

  struct Analytic {
    Fn value;
    Fn derivative;         // optional
    Fn log_value;          // optional, log of value at t; for values that overflow
    Fn log_value_log_arg;  // optional, log of value at t = exp(s)
    double t_max = std::numeric_limits<double>::infinity();
    Monotonicity monotonicity = Monotonicity::none;
    std::vector<double> breakpoints;  // points where the function is not smooth
  };

  static RadialFunction analytic(Analytic spec);
  static RadialFunction constant(double k);
  // Monotone cubic (PCHIP) through the samples; no extrapolation.
  static RadialFunction sampled(std::vector<double> t, std::vector<double> values,
                                Monotonicity declared);

  double operator()(double t) const;
  std::optional<double> derivative(double t) const;
  // Derivative if available, else a central difference.
  double slope(double t) const;
  double log_value(double t) const;
  double log_value_log_arg(double s) const;

  Monotonicity monotonicity() const;
  FunctionKind kind() const;
  double t_max() const;
  std::span<const double> breakpoints() const;
  bool has_derivative() const;

  // Checks declared monotonicity on a grid; returns the largest violation (0 if none).
  double monotonicity_violation(std::span<const double> grid) const;

 private:
  struct Impl;
  explicit RadialFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

}  // namespace hadamard
