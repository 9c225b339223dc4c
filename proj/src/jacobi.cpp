#include "hadamard/jacobi.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "hadamard/errors.hpp"
#include "hadamard/grid.hpp"

namespace hadamard {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLogSeriesEnd = std::log(JacobiSolution::kSeriesEnd);

double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - std::numbers::ln2;
}

// t^2 k(t)^2 at t = exp(s).
double scaled_k2(const RadialFunction& k, double s) {
  if (s < 300.0) {
    const double t = std::exp(s);
    if (t <= k.t_max()) {
      const double kv = k(t);
      const double v = t * kv;
      if (std::isfinite(v * v)) return v * v;
    }
  }
  return std::exp(2.0 * s + 2.0 * k.log_value_log_arg(s));
}

}  // namespace

JacobiSolution::JacobiSolution(RadialFunction k, ode::RiccatiTrajectory traj, double q0, double q1)
    : k_(std::move(k)), traj_(std::move(traj)), q0_(q0), q1_(q1) {
  const double t0 = kSeriesEnd;
  L0_ = std::log(t0) + q0_ * t0 * t0 / 6.0 + q1_ * t0 * t0 * t0 / 12.0;
}

double JacobiSolution::log_f_at_log(double s) const {
  if (s <= kLogSeriesEnd) {
    const double t = std::exp(s);
    return s + q0_ * t * t / 6.0 + q1_ * t * t * t / 12.0;
  }
  return L0_ + traj_.at(s).integral;
}

double JacobiSolution::w_at_log(double s) const {
  if (s <= kLogSeriesEnd) {
    const double t = std::exp(s);
    return 1.0 + q0_ * t * t / 3.0 + q1_ * t * t * t / 4.0;
  }
  return traj_.at(s).y;
}

double JacobiSolution::log_f(double t) const {
  if (t < 0.0) throw DomainError("Jacobi solution queried at negative t");
  if (t == 0.0) return -kInf;
  return log_f_at_log(std::log(t));
}

double JacobiSolution::u(double t) const {
  if (t < 0.0) throw DomainError("Jacobi solution queried at negative t");
  if (t == 0.0) return kInf;
  return w_at_log(std::log(t)) / t;
}

double JacobiSolution::f(double t) const { return std::exp(log_f(t)); }
double JacobiSolution::f_prime(double t) const { return t == 0.0 ? 1.0 : u(t) * f(t); }
double JacobiSolution::log_f_prime(double t) const {
  if (t == 0.0) return 0.0;
  const double s = std::log(t);
  return log_f_at_log(s) + std::log(w_at_log(s)) - s;
}

double JacobiSolution::log_t_max() const { return traj_.s_end(); }
double JacobiSolution::t_max() const { return std::exp(traj_.s_end()); }

std::vector<double> JacobiSolution::t_grid() const {
  std::vector<double> out{0.0};
  for (const auto& n : traj_.nodes()) out.push_back(std::exp(n.s));
  return out;
}

void JacobiSolution::write_csv(std::ostream& os) const {
  os << "t,log_f,u\n";
  char buf[128];
  for (const auto& n : traj_.nodes()) {
    const double t = std::exp(n.s);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t, L0_ + n.integral, n.y / t);
    os << buf;
  }
}

JacobiSolution solve_jacobi_log(const RadialFunction& k, double log_t_max, double rtol) {
  if (!(rtol > 0.0 && rtol <= 1e-2)) throw DomainError("rtol must lie in (0, 1e-2]");
  if (!(log_t_max > kLogSeriesEnd)) throw DomainError("t_max must exceed the series start 1e-3");
  const double t_max = std::exp(log_t_max);
  if (t_max > k.t_max()) throw DomainError("t_max beyond the domain of k");
  // Negative k is a domain error; scan a coarse grid (the catalog is nonnegative by construction).
  const double scan_hi = std::isfinite(t_max) ? t_max : std::min(k.t_max(), 1e300);
  for (double t : linear_grid(0.0, std::min(scan_hi, 1e6), 1001))
    if (k(t) < 0.0) throw DomainError("k is negative at t=" + std::to_string(t));

  const double k0 = k(0.0);
  const double q0 = k0 * k0;
  const double q1 = 2.0 * k0 * k.slope(0.0);
  const double t0 = JacobiSolution::kSeriesEnd;
  const double w0 = 1.0 + q0 * t0 * t0 / 3.0 + q1 * t0 * t0 * t0 / 4.0;

  ode::RiccatiOptions opts;
  opts.rtol = rtol;
  opts.atol = 1e-14;
  for (double b : k.breakpoints())
    if (b > 0.0) opts.breakpoints.push_back(std::log(b));
  auto coeff = [k](double s) { return ode::RiccatiCoefficients{scaled_k2(k, s), 1.0}; };
  auto traj = ode::integrate_riccati(coeff, kLogSeriesEnd, w0, log_t_max, opts);
  return JacobiSolution(k, std::move(traj), q0, q1);
}

JacobiSolution solve_jacobi(const RadialFunction& k, double t_max, double rtol) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw DomainError("t_max must be positive and finite");
  return solve_jacobi_log(k, std::log(t_max), rtol);
}

JacestReport jacest_check(const JacobiSolution& sol, double eps, double eps1, double t_lo, double t_hi) {
  if (!(0.0 < eps1 && eps1 < eps)) throw DomainError("jacest needs 0 < eps1 < eps");
  if (!(t_lo > std::numbers::e)) throw DomainError("jacest range must start above e (log t > 1)");
  if (!(t_hi > t_lo)) throw DomainError("jacest range is empty");
  if (t_hi > sol.t_max() * (1 + 1e-12)) throw DomainError("jacest range exceeds the solution");
  const auto grid = geometric_grid(t_lo, std::min(t_hi, sol.t_max()));
  const std::size_t n = grid.size();
  std::vector<double> fs(n), us(n), fps(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = grid[i];
    const double s = std::log(t), lt = s, llt = std::log(lt);
    const double lf = sol.log_f_at_log(s), w = sol.w_at_log(s);
    fs[i] = lf - (s + (1.0 + eps1) * llt);
    us[i] = std::log(w) - std::log1p((1.0 + eps1) / lt);
    const double lfp = lf + std::log(w) - s;
    fps[i] = lfp - std::log(std::pow(lt, 1.0 + eps1) + (1.0 + eps1) * std::pow(lt, eps1));
  }
  JacestReport r;
  r.grid_points = n;
  // Walk back from the top: R1 is the start of the longest passing tail.
  std::size_t first = n;
  while (first > 0 && fs[first - 1] >= 0.0 && us[first - 1] >= 0.0) --first;
  const std::size_t from = first < n ? first : 0;
  r.pass = first < n;
  if (r.pass) r.r1 = grid[first];
  r.min_f_slack = *std::min_element(fs.begin() + from, fs.end());
  r.min_u_slack = *std::min_element(us.begin() + from, us.end());
  r.min_fprime_slack = *std::min_element(fps.begin() + from, fps.end());
  return r;
}

json to_json(const JacestReport& r) {
  return {{"pass", r.pass},
          {"R1", r.r1 ? json(*r.r1) : json(nullptr)},
          {"min_f_slack", json_number(r.min_f_slack)},
          {"min_u_slack", json_number(r.min_u_slack)},
          {"min_fprime_slack", json_number(r.min_fprime_slack)},
          {"grid_points", r.grid_points}};
}

ImplemmaReport implemma_check(const CurvatureProfile& profile, double t_max, std::optional<TailMajorant> tail,
                              double rtol) {
  if (!(t_max > 0.0)) throw DomainError("implemma needs t_max > 0");
  const auto& a = profile.a;
  const auto& b = profile.b;
  if (a.monotonicity() != Monotonicity::increasing || b.monotonicity() != Monotonicity::increasing)
    throw HypothesisViolation("implemma needs a and b declared increasing");
  const auto check_grid = linear_grid(0.0, t_max, 2001);
  if (a.monotonicity_violation(check_grid) > 0.0 || b.monotonicity_violation(check_grid) > 0.0)
    throw HypothesisViolation("implemma needs a and b increasing; the samples are not");
  for (double t : check_grid)
    if (b(t) < a(t)) throw HypothesisViolation("implemma needs b >= a; violated at t=" + std::to_string(t));

  auto integrand = [&](double t) {
    const double av = a(t), bv = b(t);
    if (bv == 0.0) return 0.0;
    return (bv - av) * (bv + av) / bv;
  };
  ImplemmaReport r;
  double quad_err = 0.0;
  const double body =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, 0.0, t_max, 20, 1e-13, &quad_err);
  if (tail) {
    if (!(tail->rate > 0.0) || !(tail->coeff >= 0.0)) throw DomainError("tail majorant needs rate > 0, coeff >= 0");
    r.tail_bound = tail->coeff * std::exp(-tail->rate * t_max) / tail->rate;
  } else if (integrand(t_max) > 0.0) {
    throw HypothesisViolation("integrand does not vanish at t_max and no tail majorant was declared");
  }
  r.bound.integral_I = body + r.tail_bound;
  r.bound.c_bound = std::exp(0.5 * std::numbers::pi * r.bound.integral_I);

  const auto fa = solve_jacobi(a, t_max, rtol);
  const auto fb = solve_jacobi(b, t_max, rtol);
  std::vector<double> grid = fa.t_grid();
  for (double t : fb.t_grid()) grid.push_back(t);
  for (double t : linear_grid(0.0, t_max, 301)) grid.push_back(t);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const double bound = 0.5 * std::numbers::pi * r.bound.integral_I;
  r.max_violation = -kInf;
  for (double t : grid) {
    if (t <= 0.0 || t > t_max) continue;
    r.max_violation = std::max(r.max_violation, fb.log_f(t) - fa.log_f(t) - bound);
    ++r.grid_points;
  }
  return r;
}

json to_json(const ImplemmaReport& r) {
  return {{"I", r.bound.integral_I},
          {"c_bound", r.bound.c_bound},
          {"tail_bound", r.tail_bound},
          {"max_violation", json_number(r.max_violation)},
          {"grid_points", r.grid_points}};
}

double log_lower_cosh_bound(const JacobiSolution& sol, double t, double s) {
  if (!(t >= 0.0)) throw DomainError("cosh bound needs t >= 0");
  if (s < t) throw DomainError("cosh bound needs s >= t");
  return sol.log_f(t) + log_cosh(sol.k_profile()(t) * (s - t));
}

double lower_cosh_bound(const JacobiSolution& sol, double t, double s) {
  return std::exp(log_lower_cosh_bound(sol, t, s));
}

}  // namespace hadamard
