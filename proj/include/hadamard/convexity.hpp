#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "hadamard/jacobi.hpp"
#include "hadamard/models.hpp"
#include "hadamard/sc_gate.hpp"

namespace hadamard {

enum class BumpVariant { unit, eps, harmonic };
std::string to_string(BumpVariant v);
BumpVariant bump_variant_from_string(const std::string& s);

struct EpsilonRule {
  double beta;
  BumpVariant variant = BumpVariant::unit;
  double eps = 1.0;     // only for the eps-bump variant
  double L_bump = 4.0;  // bound on the cutoff derivatives

  static EpsilonRule make(double beta, BumpVariant variant, double eps = 1.0, double L_bump = 4.0);
};

double epsilon_R(const EpsilonRule& rule, const CurvatureProfile& profile, const JacobiSolution& sol_a, double R);
// Lower bound for the Hessian of the perturbed distance; affine in beta.
double betaL_margin(const EpsilonRule& rule, const CurvatureProfile& profile, const JacobiSolution& sol_a, double R);

// Terms are stored multiplied by rho^2 log rho, so they stay finite where rho itself overflows.
struct CertificateMargin {
  double R;
  double log_rho;
  double c4;
  double dominant;
  double hessian_h;
  double bracket;
  double margin;
  double log_scale;  // log(rho^2 log rho); unscaled term = term * exp(-log_scale)
};

CertificateMargin certificate_margin(const DataC& data, const ScParams& params, const JacobiSolution& sol_a,
                                     double R, double log_rho, double c4);

struct ConstructionStep {
  double r;
  double eps;
};

struct ConstructionRow {
  int n;
  double lo;
  double hi;
  double t_n_bound;
  double theta_n_bound;
  double term;
  double partial_sum;
  int realized;  // number of realized radii in [lo, hi)
};

enum class TraceStatus { converged, budget_exceeded, inconclusive };
std::string to_string(TraceStatus s);

struct ConstructionTrace {
  double r0;
  double alpha_budget;
  double c_angle;
  BumpVariant variant;
  std::vector<ConstructionRow> rows;
  std::vector<ConstructionStep> steps;  // realized r_i and eps_i, capped
  bool steps_truncated = false;
  TraceStatus status = TraceStatus::inconclusive;
  bool converged = false;
  double tail_bound = 0.0;
  bool eps_monotone_hypothesis = false;  // b non-decreasing and u non-increasing on the range
  bool eps_monotone_observed = false;
  double telescoping_error = 0.0;  // |sum eps - (r_N - r0)|

  double sum() const { return rows.empty() ? 0.0 : rows.back().partial_sum; }
};

ConstructionTrace run_construction(const CurvatureProfile& profile, const JacobiSolution& sol_a,
                                   const EpsilonRule& rule, double r0, double alpha_budget, double c_angle,
                                   int n_max, std::size_t max_realized_steps = 200000);

struct FindR0Options {
  double r_lo = 1.0;
  double r_hi = 30.0;
  double resolution = 0.01;
  int n_max = 200;
};

double find_r0(const CurvatureProfile& profile, const JacobiSolution& sol_a, const EpsilonRule& rule,
               double alpha_budget, double c_angle, const FindR0Options& opts = {});

nlohmann::json to_json(const CertificateMargin& m);
nlohmann::json summary_json(const ConstructionTrace& t);
void write_csv(std::ostream& os, const ConstructionTrace& t);

}  // namespace hadamard
