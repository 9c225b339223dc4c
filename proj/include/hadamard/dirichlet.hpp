#pragma once

#include <json.hpp>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "hadamard/riccati.hpp"
#include "hadamard/rotsym.hpp"

namespace hadamard {

struct FourierMode {
  int n;
  double a;  // cos coefficient
  double b;  // sin coefficient
};

class BoundaryData {
 public:
  static BoundaryData make(std::vector<FourierMode> modes);

  const std::vector<FourierMode>& modes() const { return modes_; }
  double operator()(double theta) const;
  double sup_norm() const { return sup_norm_; }
  double coefficient_l1() const;

 private:
  std::vector<FourierMode> modes_;
  double sup_norm_ = 0.0;
};

BoundaryData boundary_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BoundaryData& d);

// Regular solution of phi'' + (f'/f) phi' - (n/f)^2 phi = 0 on [0, R], phi(R) = 1.
class ModeProfile {
 public:
  static constexpr double kSeriesEnd = 1e-3;

  int n() const { return n_; }
  double R() const { return R_; }
  double value(double r) const;
  double log_value(double r) const;

 private:
  friend ModeProfile solve_mode(const RotSymSurface&, int, double, double);
  ModeProfile(int n, double R) : n_(n), R_(R) {}
  int n_;
  double R_;
  double c_ = 0.0;       // w = n + c r^2 near the pole
  double log_norm_ = 0;  // Q(log R)
  std::optional<ode::RiccatiTrajectory> traj_;
};

ModeProfile solve_mode(const RotSymSurface& surface, int n, double R, double rtol);

enum class Attainment { attained, not_attained, inconclusive };
const char* to_string(Attainment a);

struct ModeReport {
  int n = 0;
  std::vector<double> changes;  // sup over r <= R_{j-1} of |phi^(j) - phi^(j-1)|
  bool converged = false;
  double window_min = 0.0;  // over the final 20% of [0, R_{J-1}] for the largest-disk profile
  double window_max = 0.0;
  Attainment verdict = Attainment::inconclusive;
};

class HarmonicSolution {
 public:
  const RotSymSurface& surface() const { return surface_; }
  const BoundaryData& data() const { return data_; }
  const std::vector<double>& radii() const { return radii_; }
  const std::vector<ModeReport>& reports() const { return reports_; }
  const ModeProfile& profile(std::size_t j, std::size_t mode_index) const { return profiles_[j][mode_index]; }

  // u on the j-th disk (default: the largest)
  double u(double r, double theta, std::optional<std::size_t> j = std::nullopt) const;
  double sup_abs_on_samples(std::size_t n_r = 64, std::size_t n_theta = 64) const;

 private:
  friend HarmonicSolution exhaust(const RotSymSurface&, const BoundaryData&, std::span<const double>, double);
  HarmonicSolution(RotSymSurface s, BoundaryData d) : surface_(std::move(s)), data_(std::move(d)) {}
  RotSymSurface surface_;
  BoundaryData data_;
  std::vector<double> radii_;
  std::vector<std::vector<ModeProfile>> profiles_;  // [radius][mode]
  std::vector<ModeReport> reports_;
};

HarmonicSolution exhaust(const RotSymSurface& surface, const BoundaryData& data, std::span<const double> radii,
                         double rtol);

nlohmann::json to_json(const HarmonicSolution& s);
void write_csv(std::ostream& os, const HarmonicSolution& s, std::size_t n_r, std::size_t n_theta);

}  // namespace hadamard
