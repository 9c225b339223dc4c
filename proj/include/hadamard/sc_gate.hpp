#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "hadamard/jacobi.hpp"
#include "hadamard/models.hpp"

namespace hadamard {

struct ScParams {
  double eps1;
  double alpha;
  double lambda;
  double t0;
  double pinch2_eps;

  // Validates eps_tilde < eps1 < eps, 0 < alpha < eps1 - eps_tilde, 0 < lambda < 1, t0 > 0.
  static ScParams make(const DataC& data, double eps1, double alpha, double lambda, double t0,
                       double pinch2_eps);
};

enum class Branch { branch1, branch1_increasing_b, branch2, none };
std::string to_string(Branch b);

enum class PinchVariant { general, increasing_b, both };

struct SlackSeries {
  std::string name;
  std::vector<double> t;
  std::vector<double> slack;  // log-space, >= 0 means the inequality holds
  double min() const;
  bool holds() const;
};

struct Branch2Stats {
  double sup_log_L;
  double slope;              // least-squares slope of log L against log t, final decade
  double max_step_increase;  // largest increase between consecutive grid points
  double decade_lo;
  bool bounded;
  bool non_increasing;
};

struct ScVerdict {
  Branch branch = Branch::none;
  ScParams witness{};
  std::vector<SlackSeries> evidence;
  std::optional<CConditionsReport> c_conditions;
  std::optional<Branch2Stats> branch2;
  std::vector<std::string> notes;
  std::string caveat = "asymptotic claim checked on finite window";

  // The decisive number: minimum slack for branch1 verdicts, sup log L for branch2.
  double sup_slack() const;
};

// Log-space slack of the upper pinching bound at t; used for re-evaluation at arbitrary points.
double pinch1_slack(const DataC& data, const ScParams& params, const JacobiSolution& sol_a, double t,
                    PinchVariant variant);
double lower_bar_slack(const DataC& data, double t);
double branch2_log_L(const DataC& data, const JacobiSolution& sol_a, double pinch2_eps, double t);

ScVerdict check_branch1(const DataC& data, const ScParams& params, const JacobiSolution& sol_a, double w_lo,
                        double w_hi, PinchVariant variant = PinchVariant::both);
ScVerdict check_branch2(const DataC& data, const JacobiSolution& sol_a, double pinch2_eps, double w_lo,
                        double w_hi);
ScVerdict decide_sc(const DataC& data, const ScParams& params, double w_lo, double w_hi, double rtol = 1e-9);

nlohmann::json to_json(const ScVerdict& v);
nlohmann::json to_json(const ScParams& p);

}  // namespace hadamard
