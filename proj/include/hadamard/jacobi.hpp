#pragma once

#include <json.hpp>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "hadamard/models.hpp"
#include "hadamard/radial_function.hpp"
#include "hadamard/riccati.hpp"

namespace hadamard {

// f(0)=0, f'(0)=1, f''=k^2 f, stored as (log f, u = f'/f). Internally the
// Riccati equation is integrated in s = log t for w = t*u.
class JacobiSolution {
 public:
  static constexpr double kSeriesEnd = 1e-3;

  JacobiSolution(RadialFunction k, ode::RiccatiTrajectory traj, double q0, double q1);

  double log_f(double t) const;
  double u(double t) const;
  // Same quantities addressed by s = log t; usable far beyond double range of t.
  double log_f_at_log(double s) const;
  double w_at_log(double s) const;  // t*u(t)

  double f(double t) const;        // may overflow to inf
  double f_prime(double t) const;  // may overflow to inf
  double log_f_prime(double t) const;
  double log_ratio(double s_num, double t_den) const { return log_f(s_num) - log_f(t_den); }

  double t_max() const;
  double log_t_max() const;
  std::vector<double> t_grid() const;  // starts at 0
  const RadialFunction& k_profile() const { return k_; }

  void write_csv(std::ostream& os) const;

 private:
  RadialFunction k_;
  ode::RiccatiTrajectory traj_;
  double q0_, q1_;
  double L0_;  // log f at the series end
};

// Solve up to t_max.
JacobiSolution solve_jacobi(const RadialFunction& k, double t_max, double rtol);
// Solve up to t = exp(log_t_max), for radii beyond double range.
JacobiSolution solve_jacobi_log(const RadialFunction& k, double log_t_max, double rtol);

struct JacestReport {
  bool pass = false;
  std::optional<double> r1;  // least grid point after which both bounds hold
  double min_f_slack = 0.0;  // over the tail beyond r1 (or whole range on failure)
  double min_u_slack = 0.0;
  double min_fprime_slack = 0.0;  // derivative bound, reported at the same R1
  std::size_t grid_points = 0;
};

JacestReport jacest_check(const JacobiSolution& sol, double eps, double eps1, double t_lo, double t_hi);
nlohmann::json to_json(const JacestReport& r);

struct TailMajorant {
  double coeff;  // integrand <= coeff * exp(-rate t) beyond t_max
  double rate;
};

struct ComparisonBound {
  double integral_I;
  double c_bound;
};

struct ImplemmaReport {
  ComparisonBound bound;
  double tail_bound = 0.0;
  double max_violation = 0.0;  // max over grid of log f_b - log f_a - (pi/2) I
  std::size_t grid_points = 0;
};

ImplemmaReport implemma_check(const CurvatureProfile& profile, double t_max,
                              std::optional<TailMajorant> tail, double rtol = 1e-10);
nlohmann::json to_json(const ImplemmaReport& r);

// f(t) cosh(k(t)(s - t)), the comparison lower bound for f(s) when k increases.
double lower_cosh_bound(const JacobiSolution& sol, double t, double s);
double log_lower_cosh_bound(const JacobiSolution& sol, double t, double s);

}  // namespace hadamard
