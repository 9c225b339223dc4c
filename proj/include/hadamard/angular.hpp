#pragma once

#include <cstdint>
#include <functional>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "hadamard/jacobi.hpp"
#include "hadamard/models.hpp"
#include "hadamard/radial_function.hpp"
#include "hadamard/rotsym.hpp"

namespace hadamard {

// chi(s) = sigma(2-|s|) / (sigma(2-|s|) + sigma(|s|-1)), sigma(x) = exp(-1/x) for x > 0.
struct MollifierKernel {
  static double chi(double s);
  static double chi_prime(double s);
};

// min(1, max(2 - 2 rho, L * angle to v0))
double tilde_h(const ConeSpec& cone, GeoPoint p);

using ScalarField = std::function<double(GeoPoint)>;

struct PolarBox {
  double r_lo, r_hi;
  double half_width;  // angular half-width around the centre; pi means the whole circle
  double support;     // D with b(rho(y)) d(x,y) <= 2 implying d(x,y) <= D
};

PolarBox support_box(const RotSymSurface& surface, const RadialFunction& b, GeoPoint p);

struct AngularJet {
  double h = 0.0;
  double dr = 0.0, dtheta = 0.0;  // coordinate derivatives
  double grad_norm = 0.0;
  std::optional<double> hess_norm;
};

// h = P(tilde_h) on a 2-d rotationally symmetric surface.
class AngularExtension {
 public:
  // phi defaults to tilde_h of the cone
  AngularExtension(RotSymSurface surface, RadialFunction b, ConeSpec cone, double quad_tol = 1e-4,
                   ScalarField phi = {});

  const RotSymSurface& surface() const { return surface_; }
  const ConeSpec& cone() const { return cone_; }
  double quad_tol() const { return quad_tol_; }
  const RadialFunction& b() const { return b_; }

  PolarBox support_box(GeoPoint p) const;
  double R(GeoPoint p, const ScalarField& phi) const;
  double mollify(GeoPoint p, const ScalarField& phi) const;
  double value(GeoPoint p) const;
  AngularJet jet(GeoPoint p, bool with_hessian) const;

  // Least radius beyond which the support of every point outside 2*cone misses {tilde_h < 1}.
  double computed_radius() const;

 private:
  RotSymSurface surface_;
  RadialFunction b_;
  ConeSpec cone_;
  double quad_tol_;
  ScalarField phi_;
};

enum class DecayVariant { general, increasing_b };

struct FieldSample {
  GeoPoint p;
  double h;
  double grad_ratio;  // |grad h| f_a(lambda rho)
  double hess_ratio;  // ||D^2 h|| f_a(lambda rho) / b(rho)
};

struct DecayReport {
  std::vector<double> rho;
  std::vector<double> c4_grad;  // sup over rays at each rho
  std::vector<double> c4_hess;
  double sup_grad = 0.0, sup_hess = 0.0;
  double slope_grad = 0.0, slope_hess = 0.0;  // final-window slope of log c4 vs log rho
  bool pass = false;
  std::vector<FieldSample> samples;
};

DecayReport decay_check(const AngularExtension& field, const JacobiSolution& sol_a, double lambda, double t0,
                        DecayVariant variant, std::span<const double> rho_grid, std::span<const double> ray_offsets);
void write_csv(std::ostream& os, const DecayReport& r);

struct VahApuReport {
  std::size_t pairs = 0;
  double min_ratio = 0.0, max_ratio = 0.0;
  double c = 1.0;  // fitted constant: all ratios lie in [1/c, c]
};

VahApuReport vah_apu_check(const RotSymSurface& surface, const RadialFunction& b, std::size_t n_pairs, double rho_lo,
                           double rho_hi, std::uint64_t seed);

nlohmann::json to_json(const DecayReport& r);
nlohmann::json to_json(const VahApuReport& r);

}  // namespace hadamard
