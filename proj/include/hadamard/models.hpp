#pragma once

#include <array>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hadamard/radial_function.hpp"

namespace hadamard {

// Lower and upper curvature roots: -b(rho)^2 <= K <= -a(rho)^2.
struct CurvatureProfile {
  RadialFunction a;
  RadialFunction b;
  double r_star = 0.0;
  std::optional<nlohmann::json> source;  // catalog spec this came from, for round trips

  // Largest a - b over the grid points >= r_star (<= 0 when ordered).
  double ordering_violation(std::span<const double> grid) const;
};

struct DataC {
  CurvatureProfile profile;
  double t1;
  double eps;
  double eps_tilde;
  double c1;
  int dim;

  DataC(CurvatureProfile profile, double t1, double eps, double eps_tilde, double c1, int dim);
};

struct ConeSpec {
  double L;
  double v0;  // polar angle of the boundary direction
  int multiplier = 1;

  ConeSpec(double L, double v0, int multiplier = 1);
  // Half-angle of multiplier * cone.
  double half_angle() const { return multiplier / L; }
};

CurvatureProfile catalog_lookup(const std::string& name, const nlohmann::json& params = {});

CurvatureProfile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const CurvatureProfile& p);

struct ConditionResult {
  std::string name;
  bool pass = true;
  std::optional<double> first_violation;
  double inf_slack = 0.0;  // infimum of the log-ratio slack over the grid
};

struct CConditionsReport {
  std::array<ConditionResult, 4> conditions;
  bool all_pass() const;
};

CConditionsReport check_c_conditions(const DataC& data, std::span<const double> grid);

nlohmann::json to_json(const CConditionsReport& r);

// Non-finite doubles become strings so reports stay valid JSON.
nlohmann::json json_number(double x);

}  // namespace hadamard
