#pragma once

#include <functional>
#include <json.hpp>
#include <memory>
#include <span>
#include <vector>

#include "hadamard/jacobi.hpp"

namespace hadamard {

struct GeoPoint {
  double r;
  double theta;  // normalized to [0, 2 pi)

  static GeoPoint make(double r, double theta);
};

// Signed angular difference a - b wrapped to (-pi, pi].
double angle_difference(double a, double b);

// dr^2 + f(r)^2 dtheta^2 with f(0) = 0, f'(0) = 1.
class RotSymSurface {
 public:
  enum class Kind { hyperbolic, euclidean, jacobi };

  static RotSymSurface hyperbolic(double kappa = 1.0, int dim = 2);
  static RotSymSurface euclidean(int dim = 2);
  static RotSymSurface from_jacobi(std::shared_ptr<const JacobiSolution> sol, int dim = 2);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double kappa() const { return kappa_; }  // hyperbolic only
  double r_max() const;

  double log_f(double r) const;
  double f(double r) const;
  double u(double r) const;  // f'/f
  double f_prime(double r) const;
  // log f(r + delta) - log f(r) without cancellation for small delta.
  double log_f_increment(double r, double delta) const;
  // s = log r addressing
  double log_f_at_log(double s) const;
  double w_at_log(double s) const;  // r f'(r)/f(r)

 private:
  RotSymSurface(Kind kind, double kappa, std::shared_ptr<const JacobiSolution> sol, int dim);
  Kind kind_;
  double kappa_;
  std::shared_ptr<const JacobiSolution> sol_;
  int dim_;
};

struct DistanceResult {
  double d;
  double dd_dr;      // derivative with respect to the radius of the first point
  double dd_dtheta;  // derivative with respect to the angle of the first point
};

// Geodesic distance by Clairaut quadrature with a turning-point branch split.
double distance(const RotSymSurface& surface, GeoPoint p, GeoPoint q);
DistanceResult distance_with_gradient(const RotSymSurface& surface, GeoPoint p, GeoPoint q);
// Closed forms where they exist (hyperbolic, euclidean); Clairaut otherwise.
DistanceResult fast_distance(const RotSymSurface& surface, GeoPoint p, GeoPoint q);

double angular_gradient_bound(const RotSymSurface& surface, GeoPoint p);

double unit_ball_volume(int k);  // alpha_k
double ball_volume(const RotSymSurface& surface, int k, double t);
double log_ball_volume(const RotSymSurface& surface, int k, double t);
double cone_mass(const RotSymSurface& surface, double gamma_measure, int k, double t);

struct MassRatioSeries {
  std::vector<double> t;
  std::vector<double> mass;
  std::vector<double> ball_vol;
  std::vector<double> ratio;

  static MassRatioSeries make(std::vector<double> t, std::vector<double> mass, std::vector<double> ball_vol);
};

MassRatioSeries mass_ratio_series(const RotSymSurface& surface, int k, std::span<const double> t_grid,
                                  const std::function<double(double)>& mass);

struct MonotonicityReport {
  double max_violation;
  bool pass;
};
MonotonicityReport monotonicity_check(const MassRatioSeries& series);

struct ConeInequalityReport {
  double max_excess;    // max of m - (beta/beta') m', <= 0 when the inequality holds
  double max_rel_gap;   // max |m - (beta/beta') m'| / max(m, tiny)
  bool holds;
  bool equality;        // gap within 1e-6 relative everywhere
};
ConeInequalityReport cone_inequality_check(const RotSymSurface& surface, int k, std::span<const double> t_grid,
                                           const std::function<double(double)>& total_mass);

nlohmann::json to_json(const MonotonicityReport& r);
nlohmann::json to_json(const ConeInequalityReport& r);

}  // namespace hadamard
