#include "hadamard/radial_function.hpp"

#include <algorithm>
#include <cmath>

// Boost 1.74 pchip calls unqualified isnan.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <limits>

#include "hadamard/errors.hpp"

namespace hadamard {

std::string to_string(Monotonicity m) {
  switch (m) {
    case Monotonicity::increasing: return "increasing";
    case Monotonicity::decreasing: return "decreasing";
    case Monotonicity::none: return "none";
  }
  return "none";
}

Monotonicity monotonicity_from_string(const std::string& s) {
  if (s == "increasing") return Monotonicity::increasing;
  if (s == "decreasing") return Monotonicity::decreasing;
  if (s == "none") return Monotonicity::none;
  throw ConstraintViolation("unknown monotonicity '" + s + "'");
}

struct RadialFunction::Impl {
  FunctionKind kind;
  Analytic spec;
  std::optional<boost::math::interpolators::pchip<std::vector<double>>> interp;
  double t_min = 0.0;
};

RadialFunction RadialFunction::analytic(Analytic spec) {
  if (!spec.value) throw ConstraintViolation("analytic radial function needs a value map");
  std::sort(spec.breakpoints.begin(), spec.breakpoints.end());
  auto impl = std::make_shared<Impl>();
  impl->kind = FunctionKind::analytic;
  impl->spec = std::move(spec);
  return RadialFunction(std::move(impl));
}

RadialFunction RadialFunction::constant(double k) {
  if (!(k >= 0.0) || !std::isfinite(k)) throw ConstraintViolation("constant must be finite and >= 0");
  Analytic spec;
  spec.value = [k](double) { return k; };
  spec.derivative = [](double) { return 0.0; };
  spec.log_value_log_arg = [k](double) { return std::log(k); };
  spec.monotonicity = Monotonicity::increasing;
  return analytic(std::move(spec));
}

RadialFunction RadialFunction::sampled(std::vector<double> t, std::vector<double> values,
                                       Monotonicity declared) {
  if (t.size() != values.size()) throw ConstraintViolation("grid and values differ in length");
  if (t.size() < 4) throw ConstraintViolation("sampled function needs at least 4 points");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw ConstraintViolation("grid must be strictly increasing");
  for (double v : values)
    if (!std::isfinite(v) || v < 0.0) throw ConstraintViolation("sampled values must be finite and >= 0");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (declared == Monotonicity::increasing && values[i] < values[i - 1])
      throw ConstraintViolation("samples are not increasing as declared");
    if (declared == Monotonicity::decreasing && values[i] > values[i - 1])
      throw ConstraintViolation("samples are not decreasing as declared");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = FunctionKind::sampled;
  impl->t_min = t.front();
  impl->spec.t_max = t.back();
  impl->spec.monotonicity = declared;
  impl->interp.emplace(std::move(t), std::move(values));
  return RadialFunction(std::move(impl));
}

namespace {
void check_domain(double t, double lo, double hi) {
  if (!(t >= lo) || !(t <= hi))
    throw DomainError("radial function evaluated at t=" + std::to_string(t) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
}
}  // namespace

double RadialFunction::operator()(double t) const {
  check_domain(t, impl_->t_min, impl_->spec.t_max);
  if (impl_->interp) return std::max(0.0, (*impl_->interp)(t));
  return impl_->spec.value(t);
}

std::optional<double> RadialFunction::derivative(double t) const {
  check_domain(t, impl_->t_min, impl_->spec.t_max);
  if (impl_->interp) return impl_->interp->prime(t);
  if (impl_->spec.derivative) return impl_->spec.derivative(t);
  return std::nullopt;
}

double RadialFunction::slope(double t) const {
  if (auto d = derivative(t)) return *d;
  const double h = 1e-6 * std::max(1.0, t);
  const double lo = std::max(impl_->t_min, t - h);
  const double hi = std::min(impl_->spec.t_max, t + h);
  return ((*this)(hi) - (*this)(lo)) / (hi - lo);
}

double RadialFunction::log_value(double t) const {
  if (impl_->spec.log_value) {
    check_domain(t, impl_->t_min, impl_->spec.t_max);
    return impl_->spec.log_value(t);
  }
  return std::log((*this)(t));
}

double RadialFunction::log_value_log_arg(double s) const {
  if (impl_->spec.log_value_log_arg) {
    if (std::exp(s) > impl_->spec.t_max) check_domain(std::exp(s), impl_->t_min, impl_->spec.t_max);
    return impl_->spec.log_value_log_arg(s);
  }
  const double t = std::exp(s);
  if (!std::isfinite(t)) throw DomainError("radial function has no log-argument form for large t");
  return log_value(t);
}

Monotonicity RadialFunction::monotonicity() const { return impl_->spec.monotonicity; }
FunctionKind RadialFunction::kind() const { return impl_->kind; }
double RadialFunction::t_max() const { return impl_->spec.t_max; }
bool RadialFunction::has_derivative() const {
  return impl_->interp.has_value() || static_cast<bool>(impl_->spec.derivative);
}
std::span<const double> RadialFunction::breakpoints() const { return impl_->spec.breakpoints; }

double RadialFunction::monotonicity_violation(std::span<const double> grid) const {
  double worst = 0.0;
  const auto m = monotonicity();
  if (m == Monotonicity::none) return 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double d = (*this)(grid[i]) - (*this)(grid[i - 1]);
    worst = std::max(worst, m == Monotonicity::increasing ? -d : d);
  }
  return worst;
}

}  // namespace hadamard
