#include "hadamard/sc_gate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hadamard/errors.hpp"
#include "hadamard/grid.hpp"

namespace hadamard {

using nlohmann::json;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTol = -1e-12;

SlackSeries series(std::string name, const std::vector<double>& grid, auto&& fn) {
  SlackSeries s{std::move(name), grid, {}};
  s.slack.reserve(grid.size());
  for (double t : grid) s.slack.push_back(fn(t));
  return s;
}
}  // namespace

ScParams ScParams::make(const DataC& data, double eps1, double alpha, double lambda, double t0,
                        double pinch2_eps) {
  if (!(data.eps_tilde < eps1 && eps1 < data.eps)) throw ConstraintViolation("ScParams needs eps_tilde < eps1 < eps");
  if (!(alpha > 0.0 && alpha < eps1 - data.eps_tilde))
    throw ConstraintViolation("ScParams needs 0 < alpha < eps1 - eps_tilde");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ConstraintViolation("ScParams needs 0 < lambda < 1");
  if (!(t0 > 0.0)) throw ConstraintViolation("ScParams needs t0 > 0");
  if (!(pinch2_eps > 0.0)) throw ConstraintViolation("ScParams needs pinch2_eps > 0");
  return {eps1, alpha, lambda, t0, pinch2_eps};
}

std::string to_string(Branch b) {
  switch (b) {
    case Branch::branch1: return "branch1";
    case Branch::branch1_increasing_b: return "branch1-increasing-b";
    case Branch::branch2: return "branch2";
    case Branch::none: return "none";
  }
  return "none";
}

double SlackSeries::min() const {
  double m = kInf;
  for (double s : slack) m = std::min(m, s);
  return m;
}

bool SlackSeries::holds() const { return min() >= kTol; }

double ScVerdict::sup_slack() const {
  if (branch == Branch::branch2 && branch2) return branch2->sup_log_L;
  const std::string want = branch == Branch::branch1_increasing_b ? "upper_increasing_b" : "upper_general";
  double m = kInf;
  for (const auto& e : evidence)
    if (e.name == want || e.name == "lower_bar") m = std::min(m, e.min());
  if (m == kInf && branch2) return branch2->sup_log_L;
  return m;
}

double lower_bar_slack(const DataC& data, double t) {
  const double lt = std::log(t);
  return data.profile.b.log_value(t) - (data.eps_tilde * std::log(lt) - lt);
}

double pinch1_slack(const DataC& data, const ScParams& params, const JacobiSolution& sol_a, double t,
                    PinchVariant variant) {
  const double s = std::log(t);
  const double llt = std::log(s);
  // log of f_a'(t) / (t (log t)^{1+2 alpha} f_a(t))
  const double head = std::log(sol_a.w_at_log(s)) - 2.0 * s - (1.0 + 2.0 * params.alpha) * llt;
  double shifted;
  if (variant == PinchVariant::increasing_b) {
    if (t - params.t0 <= 0.0) throw DomainError("t - t0 must be positive on the window");
    shifted = sol_a.log_f(t - params.t0);
  } else {
    shifted = sol_a.log_f_at_log(s + std::log(params.lambda));
  }
  // f_a'(t)/f_a(t) = w/t, so the bound is w/t^2 (log t)^{-(1+2 alpha)} f_a(shifted).
  return head + shifted - data.profile.b.log_value(t);
}

double branch2_log_L(const DataC& data, const JacobiSolution& sol_a, double pinch2_eps, double t) {
  const double lt = std::log(t);
  return lt + (1.0 + pinch2_eps) * std::log(lt) + data.profile.b.log_value(t) - std::log(sol_a.u(t - 2.0)) -
         sol_a.log_f(t - 3.0);
}

ScVerdict check_branch1(const DataC& data, const ScParams& params, const JacobiSolution& sol_a, double w_lo,
                        double w_hi, PinchVariant variant) {
  if (!(w_lo >= std::max(data.t1, std::numbers::e)))
    throw DomainError("branch1 window must start at or above max(T1, e)");
  if (!(w_hi > w_lo)) throw DomainError("branch1 window is empty");
  if (w_hi > sol_a.t_max() * (1 + 1e-12)) throw DomainError("solution does not cover the window");
  const auto mono = data.profile.b.monotonicity();
  if (mono == Monotonicity::none) throw HypothesisViolation("branch1 needs b declared monotonic");

  const auto grid = geometric_grid(w_lo, w_hi);
  ScVerdict v;
  v.witness = params;
  v.c_conditions = check_c_conditions(data, grid);
  v.evidence.push_back(series("lower_bar", grid, [&](double t) { return lower_bar_slack(data, t); }));
  const bool want_general = variant != PinchVariant::increasing_b;
  const bool want_incr = variant != PinchVariant::general;
  if (want_general)
    v.evidence.push_back(series("upper_general", grid, [&](double t) {
      return pinch1_slack(data, params, sol_a, t, PinchVariant::general);
    }));
  if (want_incr) {
    if (mono == Monotonicity::increasing)
      v.evidence.push_back(series("upper_increasing_b", grid, [&](double t) {
        return pinch1_slack(data, params, sol_a, t, PinchVariant::increasing_b);
      }));
    else
      v.notes.push_back("increasing-b variant skipped: b is not declared increasing");
  }

  const bool base = v.c_conditions->all_pass() && v.evidence.front().holds();
  if (!v.c_conditions->all_pass()) v.notes.push_back("C-conditions fail on the window");
  for (const auto& e : v.evidence) {
    if (!base || e.name == "lower_bar" || !e.holds()) continue;
    v.branch = e.name == "upper_general" ? Branch::branch1 : Branch::branch1_increasing_b;
    break;
  }
  return v;
}

ScVerdict check_branch2(const DataC& data, const JacobiSolution& sol_a, double pinch2_eps, double w_lo,
                        double w_hi) {
  const auto& a = data.profile.a;
  const auto& b = data.profile.b;
  if (!(w_lo > 3.0) || !(w_hi > w_lo)) throw DomainError("branch2 window must lie beyond t = 3 to fit t-3");
  if (w_hi > sol_a.t_max() * (1 + 1e-12)) throw DomainError("solution does not cover the window");
  if (!(b(0.0) > 0.0)) throw HypothesisViolation("branch2 needs b(0) > 0");
  const auto check = linear_grid(0.0, w_hi, 2001);
  if (a.monotonicity() != Monotonicity::increasing || b.monotonicity() != Monotonicity::increasing ||
      a.monotonicity_violation(check) > 0.0 || b.monotonicity_violation(check) > 0.0)
    throw HypothesisViolation("branch2 needs a and b non-decreasing");

  const auto grid = geometric_grid(w_lo, w_hi);
  ScVerdict v;
  auto logL = series("log_L", grid, [&](double t) { return branch2_log_L(data, sol_a, pinch2_eps, t); });

  Branch2Stats st{};
  st.decade_lo = std::max(w_lo, w_hi / 10.0);
  st.sup_log_L = -kInf;
  st.max_step_increase = -kInf;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  double prev = std::numeric_limits<double>::quiet_NaN();
  double first = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < st.decade_lo) continue;
    const double y = logL.slack[i], x = std::log(grid[i]);
    if (n == 0) first = y;
    st.sup_log_L = std::max(st.sup_log_L, y);
    if (!std::isnan(prev)) st.max_step_increase = std::max(st.max_step_increase, y - prev);
    prev = y;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 3) throw DomainError("branch2 final decade has fewer than 3 grid points");
  st.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double tol = 1e-9 * std::max(1.0, std::abs(st.sup_log_L));
  st.bounded = std::isfinite(st.sup_log_L) && st.sup_log_L <= first + tol;
  st.non_increasing = st.max_step_increase <= tol;
  v.branch2 = st;
  v.evidence.push_back(std::move(logL));
  v.witness.pinch2_eps = pinch2_eps;
  if (st.bounded && st.non_increasing && st.slope <= 0.0) v.branch = Branch::branch2;
  return v;
}

ScVerdict decide_sc(const DataC& data, const ScParams& params, double w_lo, double w_hi, double rtol) {
  const double need = std::max(w_hi, 1.0);
  const auto sol_a = solve_jacobi(data.profile.a, need, rtol);
  auto v1 = check_branch1(data, params, sol_a, w_lo, w_hi, PinchVariant::both);
  ScVerdict out = v1;
  if (v1.branch != Branch::none) {
    out.notes.push_back("branch2 not evaluated: branch1 passed first");
  } else {
    try {
      auto v2 = check_branch2(data, sol_a, params.pinch2_eps, w_lo, w_hi);
      for (auto& e : v2.evidence) out.evidence.push_back(std::move(e));
      out.branch2 = v2.branch2;
      out.branch = v2.branch;
    } catch (const HypothesisViolation& e) {
      out.notes.push_back(std::string("branch2 not applicable: ") + e.what());
    }
  }
  out.witness = params;
  out.caveat = "asymptotic claim checked on finite window";
  return out;
}

json to_json(const ScParams& p) {
  return {{"eps1", p.eps1}, {"alpha", p.alpha}, {"lambda", p.lambda}, {"t0", p.t0}, {"pinch2_eps", p.pinch2_eps}};
}

json to_json(const ScVerdict& v) {
  json ev = json::object();
  for (const auto& e : v.evidence)
    ev[e.name] = {{"min_slack", json_number(e.min())}, {"holds", e.holds()}, {"points", e.t.size()}};
  json out = {{"branch", to_string(v.branch)},
              {"witness", to_json(v.witness)},
              {"sup_slack", json_number(v.sup_slack())},
              {"caveat", v.caveat},
              {"evidence", ev},
              {"notes", v.notes}};
  if (v.c_conditions) out["c_conditions"] = to_json(*v.c_conditions);
  if (v.branch2)
    out["branch2"] = {{"sup_log_L", json_number(v.branch2->sup_log_L)},
                      {"slope", json_number(v.branch2->slope)},
                      {"max_step_increase", json_number(v.branch2->max_step_increase)},
                      {"decade_lo", v.branch2->decade_lo},
                      {"bounded", v.branch2->bounded},
                      {"non_increasing", v.branch2->non_increasing}};
  return out;
}

}  // namespace hadamard
