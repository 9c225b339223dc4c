#include "hadamard/convexity.hpp"

#include <algorithm>
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

// x coth x, continuous at 0
double x_coth_x(double x) {
  if (std::abs(x) < 1e-6) return 1.0 + x * x / 3.0;
  return x / std::tanh(x);
}
}  // namespace

std::string to_string(BumpVariant v) {
  switch (v) {
    case BumpVariant::unit: return "unit";
    case BumpVariant::eps: return "eps";
    case BumpVariant::harmonic: return "harmonic";
  }
  return "unit";
}

BumpVariant bump_variant_from_string(const std::string& s) {
  if (s == "unit") return BumpVariant::unit;
  if (s == "eps") return BumpVariant::eps;
  if (s == "harmonic") return BumpVariant::harmonic;
  throw ConstraintViolation("unknown bump variant '" + s + "' (unit|eps|harmonic)");
}

std::string to_string(TraceStatus s) {
  switch (s) {
    case TraceStatus::converged: return "converged";
    case TraceStatus::budget_exceeded: return "budget_exceeded";
    case TraceStatus::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

EpsilonRule EpsilonRule::make(double beta, BumpVariant variant, double eps, double L_bump) {
  if (!(beta >= 0.0)) throw ConstraintViolation("epsilon rule needs beta >= 0");
  if (variant == BumpVariant::eps && !(eps > 0.0)) throw ConstraintViolation("eps-bump needs eps > 0");
  if (!(L_bump > 0.0)) throw ConstraintViolation("epsilon rule needs L_bump > 0");
  return {beta, variant, eps, L_bump};
}

double epsilon_R(const EpsilonRule& rule, const CurvatureProfile& profile, const JacobiSolution& sol_a, double R) {
  if (R < profile.r_star) throw DomainError("epsilon_R needs R >= r_star");
  const double u = sol_a.u(R);
  if (rule.variant == BumpVariant::eps) {
    const double e = rule.eps;
    const double B = profile.b(R + 2.0 * e);
    // b coth(b e) = (b e) coth(b e) / e, finite as b -> 0
    const double bc = x_coth_x(B * e) / e;
    return rule.beta * u * std::min(e * e, e / bc);
  }
  const double b1 = profile.b(R + 1.0);
  if (!(b1 > 0.0)) throw DegenerateProfile("b(R+1) = 0 makes epsilon_R undefined");
  return rule.beta * u / b1;
}

double betaL_margin(const EpsilonRule& rule, const CurvatureProfile& profile, const JacobiSolution& sol_a, double R) {
  const double k = profile.b(0.0);
  if (!(k > 0.0)) throw DegenerateProfile("betaL margin needs b(0) > 0");
  const double u = sol_a.u(R);
  const double e_R = epsilon_R(rule, profile, sol_a, R);
  if (rule.variant == BumpVariant::eps) {
    const double e = rule.eps;
    const double B = profile.b(R + 2.0 * e);
    return u - e_R * rule.L_bump * (u + x_coth_x(B * e) / (e * e) + 1.0 / (e * e));
  }
  return u - e_R * rule.L_bump * (u + profile.b(R + 1.0) / std::tanh(0.5 * k) + 1.0);
}

CertificateMargin certificate_margin(const DataC& data, const ScParams& params, const JacobiSolution& sol_a,
                                     double R, double log_rho, double c4) {
  if (!(log_rho > 1.0)) throw DomainError("certificate margin needs rho > e");
  if (!(c4 >= 0.0)) throw DomainError("certificate margin needs c4 >= 0");
  const double ls = std::log(log_rho);  // log log rho
  if (params.alpha * ls < std::log(R))
    throw DomainError("rho is not in the boundary regime (log rho)^alpha >= R");
  const double shifted = log_rho + std::log(params.lambda);
  if (shifted > sol_a.log_t_max()) throw DomainError("solution does not reach lambda * rho");
  const double L_shift = sol_a.log_f_at_log(shifted);
  const double log_b = data.profile.b.log_value_log_arg(log_rho);
  CertificateMargin m{};
  m.R = R;
  m.log_rho = log_rho;
  m.c4 = c4;
  m.log_scale = 2.0 * log_rho + ls;
  m.dominant = R * params.alpha * sol_a.w_at_log(log_rho) / 2.0;
  m.hessian_h = -c4 * std::exp((1.0 + params.alpha) * ls + 2.0 * log_rho + log_b - L_shift);
  m.bracket = -c4 * c4 * std::exp((2.0 + params.alpha) * ls + 2.0 * log_rho - 2.0 * L_shift);
  m.margin = m.dominant + m.hessian_h + m.bracket;
  return m;
}

ConstructionTrace run_construction(const CurvatureProfile& profile, const JacobiSolution& sol_a,
                                   const EpsilonRule& rule, double r0, double alpha_budget, double c_angle,
                                   int n_max, std::size_t max_realized_steps) {
  if (r0 < profile.r_star) throw DomainError("construction needs r0 >= r_star");
  if (!(alpha_budget > 0.0 && alpha_budget <= 0.5 * std::numbers::pi))
    throw DomainError("alpha budget must lie in (0, pi/2]");
  if (n_max < 1) throw DomainError("construction needs n_max >= 1");
  if (!(c_angle > 0.0)) throw DomainError("construction needs c_angle > 0");

  ConstructionTrace tr;
  tr.r0 = r0;
  tr.alpha_budget = alpha_budget;
  tr.c_angle = c_angle;
  tr.variant = rule.variant;

  const bool harmonic = rule.variant == BumpVariant::harmonic;
  const double reach = sol_a.t_max();
  double partial = 0.0;
  double h_n = 0.0;  // harmonic number H_n
  std::vector<double> terms;
  for (int n = 0; n < n_max; ++n) {
    const double lo = harmonic ? r0 + h_n : r0 + n;
    const double hi = harmonic ? r0 + h_n + 1.0 / (n + 1) : r0 + n + 1;
    if (hi + 1.0 > reach || hi + 2.0 * rule.eps > reach) break;  // outside the solved range: undecided
    const double e_top = epsilon_R(rule, profile, sol_a, hi);
    if (!(e_top > 0.0)) throw DegenerateProfile("non-positive epsilon_R at r=" + std::to_string(hi));
    const double t_bound = (hi - lo) / e_top;
    const double theta_at = harmonic ? lo - 1.0 : r0 + n - 1.0;
    const double theta =
        theta_at <= 0.0 ? std::numbers::pi : std::min(std::numbers::pi, c_angle * std::exp(-sol_a.log_f(theta_at)));
    const double term = t_bound * theta;
    partial += term;
    terms.push_back(term);
    tr.rows.push_back({n, lo, hi, t_bound, theta, term, partial, 0});
    h_n += 1.0 / (n + 1);

    if (partial > alpha_budget) {
      tr.status = TraceStatus::budget_exceeded;
      tr.tail_bound = kInf;
      break;
    }
    if (terms.size() < 3) continue;
    const std::size_t m = terms.size();
    double tail = kInf;
    if (term == 0.0) {
      tail = 0.0;
    } else if (terms[m - 2] > 0.0 && terms[m - 3] > 0.0) {
      const double q = std::max(term / terms[m - 2], terms[m - 2] / terms[m - 3]);
      // Harmonic intervals decay polynomially; a short geometric run would flatter the tail.
      if (!harmonic && q <= 0.95) {
        tail = term * q / (1.0 - q);
      } else if (n >= 2) {
        // power law term ~ n^-p
        const double p = std::log(terms[m - 2] / term) / std::log(static_cast<double>(n) / (n - 1));
        if (p > 1.0) tail = term * n / (p - 1.0);
      }
    }
    tr.tail_bound = tail;
    if (partial + tail <= alpha_budget) {
      tr.status = TraceStatus::converged;
      tr.converged = true;
      break;
    }
  }

  // Realized iteration r_{i+1} = r_i + eps(r_i) across the bookkept intervals.
  if (!tr.rows.empty()) {
    const double stop = tr.rows.back().hi;
    double r = r0, sum_eps = 0.0, carry = 0.0;
    std::size_t row = 0;
    while (r < stop) {
      if (tr.steps.size() >= max_realized_steps) {
        tr.steps_truncated = true;
        break;
      }
      const double e = epsilon_R(rule, profile, sol_a, r);
      if (!(e > 0.0)) throw DegenerateProfile("non-positive epsilon_R at r=" + std::to_string(r));
      const double next = r + e;
      // Store the realized increment, which is exact in floating point.
      const double step = next - r;
      tr.steps.push_back({r, step});
      while (row < tr.rows.size() && r >= tr.rows[row].hi) ++row;
      if (row < tr.rows.size() && r >= tr.rows[row].lo) ++tr.rows[row].realized;
      const double t = sum_eps + step;  // Neumaier summation
      carry += std::abs(sum_eps) >= std::abs(step) ? (sum_eps - t) + step : (step - t) + sum_eps;
      sum_eps = t;
      r = next;
    }
    tr.telescoping_error = std::abs((sum_eps + carry) - (r - r0));
    tr.eps_monotone_observed = true;
    for (std::size_t i = 1; i < tr.steps.size(); ++i)
      if (tr.steps[i].eps > tr.steps[i - 1].eps * (1 + 1e-12)) tr.eps_monotone_observed = false;
    bool hyp = true;
    double prev_b = -kInf, prev_u = kInf;
    for (double t : linear_grid(r0, stop + 1.0, 400)) {
      const double bv = profile.b(t);
      const double uv = sol_a.u(std::min(t, reach));
      if (bv < prev_b || uv > prev_u * (1 + 1e-12)) hyp = false;
      prev_b = bv;
      prev_u = uv;
    }
    tr.eps_monotone_hypothesis = hyp;
  }
  return tr;
}

double find_r0(const CurvatureProfile& profile, const JacobiSolution& sol_a, const EpsilonRule& rule,
               double alpha_budget, double c_angle, const FindR0Options& opts) {
  if (!(alpha_budget > 0.0 && alpha_budget <= 0.5 * std::numbers::pi))
    throw DomainError("alpha budget must lie in (0, pi/2]");
  if (!(opts.r_hi > opts.r_lo) || !(opts.resolution > 0.0)) throw DomainError("find_r0 needs r_lo < r_hi");
  const double lo = std::max(opts.r_lo, profile.r_star);
  const long count = static_cast<long>(std::floor((opts.r_hi - lo) / opts.resolution));
  auto ok = [&](long i) {
    return run_construction(profile, sol_a, rule, lo + i * opts.resolution, alpha_budget, c_angle, opts.n_max)
        .converged;
  };
  if (!ok(count)) throw NumericError("no r0 found on the grid: the trace does not converge at r0 = " +
                                     std::to_string(lo + count * opts.resolution));
  if (ok(0)) return lo;
  long bad = 0, good = count;
  while (good - bad > 1) {
    const long mid = (bad + good) / 2;
    (ok(mid) ? good : bad) = mid;
  }
  return lo + good * opts.resolution;
}

json to_json(const CertificateMargin& m) {
  return {{"R", m.R},
          {"log_rho", m.log_rho},
          {"c4", m.c4},
          {"dominant", json_number(m.dominant)},
          {"hessian_h", json_number(m.hessian_h)},
          {"bracket", json_number(m.bracket)},
          {"margin", json_number(m.margin)},
          {"log_scale", m.log_scale}};
}

json summary_json(const ConstructionTrace& t) {
  return {{"r0", t.r0},
          {"alpha_budget", t.alpha_budget},
          {"c_angle", t.c_angle},
          {"variant", to_string(t.variant)},
          {"converged", t.converged},
          {"status", to_string(t.status)},
          {"sum", t.sum()},
          {"tail_bound", json_number(t.tail_bound)},
          {"intervals", t.rows.size()},
          {"realized_steps", t.steps.size()},
          {"steps_truncated", t.steps_truncated},
          {"eps_monotone_hypothesis", t.eps_monotone_hypothesis},
          {"eps_monotone_observed", t.eps_monotone_observed},
          {"telescoping_error", t.telescoping_error}};
}

void write_csv(std::ostream& os, const ConstructionTrace& t) {
  os << "n,lo,hi,t_n_bound,theta_n_bound,term,partial_sum,realized\n";
  char buf[256];
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.n, r.lo, r.hi, r.t_n_bound,
                  r.theta_n_bound, r.term, r.partial_sum, r.realized);
    os << buf;
  }
}

}  // namespace hadamard
