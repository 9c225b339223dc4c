#include "hadamard/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hadamard/errors.hpp"
#include "hadamard/grid.hpp"
#include "hadamard/models.hpp"

namespace hadamard {

using nlohmann::json;

BoundaryData BoundaryData::make(std::vector<FourierMode> modes) {
  for (const auto& m : modes) {
    if (m.n < 0) throw DomainError("Fourier mode index must be >= 0");
    if (!std::isfinite(m.a) || !std::isfinite(m.b)) throw DomainError("Fourier coefficients must be finite");
  }
  // merge repeated modes, keep order by n
  std::sort(modes.begin(), modes.end(), [](const auto& x, const auto& y) { return x.n < y.n; });
  std::vector<FourierMode> merged;
  for (const auto& m : modes) {
    if (!merged.empty() && merged.back().n == m.n) {
      merged.back().a += m.a;
      merged.back().b += m.b;
    } else {
      merged.push_back(m);
    }
  }
  for (auto& m : merged)
    if (m.n == 0) m.b = 0.0;

  BoundaryData d;
  d.modes_ = std::move(merged);
  int n_max = 0;
  for (const auto& m : d.modes_) n_max = std::max(n_max, m.n);
  const int samples = std::max(4096, 64 * n_max);
  for (int i = 0; i < samples; ++i) {
    const double th = 2 * std::numbers::pi * i / samples;
    d.sup_norm_ = std::max(d.sup_norm_, std::abs(d(th)));
  }
  return d;
}

double BoundaryData::operator()(double theta) const {
  double s = 0.0;
  for (const auto& m : modes_) s += m.a * std::cos(m.n * theta) + m.b * std::sin(m.n * theta);
  return s;
}

double BoundaryData::coefficient_l1() const {
  double s = 0.0;
  for (const auto& m : modes_) s += std::abs(m.a) + std::abs(m.b);
  return s;
}

BoundaryData boundary_from_json(const json& j) {
  const json& list = j.is_object() ? j.at("fourier") : j;
  if (!list.is_array()) throw DomainError("boundary data must be a list of [n, a, b]");
  std::vector<FourierMode> modes;
  for (const auto& e : list) {
    if (e.is_array()) {
      if (e.size() != 3) throw DomainError("Fourier entry needs [n, a, b]");
      modes.push_back({e[0].get<int>(), e[1].get<double>(), e[2].get<double>()});
    } else {
      modes.push_back({e.at("n").get<int>(), e.value("a", 0.0), e.value("b", 0.0)});
    }
  }
  return BoundaryData::make(std::move(modes));
}

json to_json(const BoundaryData& d) {
  json modes = json::array();
  for (const auto& m : d.modes()) modes.push_back({{"n", m.n}, {"a", m.a}, {"b", m.b}});
  return {{"fourier", modes}, {"sup_norm", d.sup_norm()}};
}

// ---------------------------------------------------------------------------

double ModeProfile::log_value(double r) const {
  if (!(r >= 0.0) || r > R_ * (1 + 1e-12)) throw DomainError("r outside [0, R]");
  if (n_ == 0) return 0.0;
  if (r == 0.0) return -std::numeric_limits<double>::infinity();
  const double r0 = kSeriesEnd;
  const double s0 = std::log(r0);
  if (r < r0 || !traj_) return -log_norm_ + n_ * (std::log(r) - s0) + 0.5 * c_ * (r * r - r0 * r0);
  const double s = std::min(std::log(r), traj_->s_end());
  return traj_->at(s).integral - log_norm_;
}

double ModeProfile::value(double r) const { return std::exp(log_value(r)); }

ModeProfile solve_mode(const RotSymSurface& surface, int n, double R, double rtol) {
  if (n < 0) throw DomainError("mode index must be >= 0");
  if (!(R > 0.0) || !std::isfinite(R)) throw DomainError("R must be positive and finite");
  if (R > surface.r_max()) throw DomainError("R beyond the representable range of the surface");
  if (!(rtol > 0.0 && rtol <= 1e-2)) throw DomainError("rtol must lie in (0, 1e-2]");
  if (surface.dim() != 2) throw DomainError("Fourier modes need a 2-dimensional surface");
  ModeProfile prof(n, R);
  if (n == 0) return prof;

  const double r0 = ModeProfile::kSeriesEnd;
  const double s0 = std::log(r0);
  const double S = std::log(R);
  // pole curvature read off w = r f'/f = 1 + q0 r^2 / 3 + ...
  const double q0 = 3.0 * (surface.w_at_log(s0) - 1.0) / (r0 * r0);
  prof.c_ = -q0 * n / 6.0;
  if (R <= r0) {
    prof.log_norm_ = n * (S - s0) + 0.5 * prof.c_ * (R * R - r0 * r0);
    return prof;
  }
  const double n2 = double(n) * n;
  auto coeff = [surface, n2](double s) {
    const double g = s - surface.log_f_at_log(s);
    return ode::RiccatiCoefficients{n2 * std::exp(2.0 * g), 1.0 - surface.w_at_log(s)};
  };
  ode::RiccatiOptions opts;
  opts.rtol = rtol;
  opts.atol = 1e-14;
  const double w0 = n + prof.c_ * r0 * r0;
  prof.traj_ = ode::integrate_riccati(coeff, s0, w0, S, opts);
  // phi(r0) is the normalization base; Q(s0) = 0
  prof.log_norm_ = prof.traj_->nodes().back().integral;
  return prof;
}

// ---------------------------------------------------------------------------

const char* to_string(Attainment a) {
  switch (a) {
    case Attainment::attained: return "attained";
    case Attainment::not_attained: return "not_attained";
    case Attainment::inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

constexpr double kAttainLevel = 1.0 - 1e-3;
constexpr std::size_t kCompareSamples = 401;

}  // namespace

HarmonicSolution exhaust(const RotSymSurface& surface, const BoundaryData& data, std::span<const double> radii,
                         double rtol) {
  if (radii.empty()) throw DomainError("need at least one radius");
  for (std::size_t j = 0; j < radii.size(); ++j) {
    if (!(radii[j] > 0.0)) throw DomainError("radii must be positive");
    if (j > 0 && !(radii[j] > radii[j - 1])) throw DomainError("radii must be increasing");
  }
  HarmonicSolution sol(surface, data);
  sol.radii_.assign(radii.begin(), radii.end());
  const auto& modes = data.modes();
  sol.profiles_.resize(radii.size());
  for (std::size_t j = 0; j < radii.size(); ++j)
    for (const auto& m : modes) sol.profiles_[j].push_back(solve_mode(surface, m.n, radii[j], rtol));

  const std::size_t J = radii.size();
  for (std::size_t k = 0; k < modes.size(); ++k) {
    ModeReport rep;
    rep.n = modes[k].n;
    for (std::size_t j = 1; j < J; ++j) {
      double worst = 0.0;
      for (double r : linear_grid(0.0, radii[j - 1], kCompareSamples))
        worst = std::max(worst, std::abs(sol.profiles_[j][k].value(r) - sol.profiles_[j - 1][k].value(r)));
      rep.changes.push_back(worst);
    }
    rep.converged = J >= 2 && rep.changes.back() <= 10.0 * rtol;

    // limit profile is trusted on [0, R_{J-1}]; with one radius use the whole disk
    const double window_end = J >= 2 ? radii[J - 2] : radii[0];
    const auto& last = sol.profiles_[J - 1][k];
    rep.window_min = std::numeric_limits<double>::infinity();
    rep.window_max = -std::numeric_limits<double>::infinity();
    for (double r : linear_grid(0.8 * window_end, window_end, 41)) {
      const double v = last.value(r);
      rep.window_min = std::min(rep.window_min, v);
      rep.window_max = std::max(rep.window_max, v);
    }
    if (modes[k].n == 0 || (rep.converged && rep.window_min >= kAttainLevel))
      rep.verdict = Attainment::attained;
    else if (J >= 2 && rep.window_max < kAttainLevel)
      rep.verdict = Attainment::not_attained;
    else
      rep.verdict = Attainment::inconclusive;
    sol.reports_.push_back(std::move(rep));
  }
  return sol;
}

double HarmonicSolution::u(double r, double theta, std::optional<std::size_t> j) const {
  const std::size_t idx = j.value_or(radii_.size() - 1);
  if (idx >= radii_.size()) throw DomainError("disk index out of range");
  double s = 0.0;
  const auto& modes = data_.modes();
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const double phi = profiles_[idx][k].value(r);
    s += phi * (modes[k].a * std::cos(modes[k].n * theta) + modes[k].b * std::sin(modes[k].n * theta));
  }
  return s;
}

double HarmonicSolution::sup_abs_on_samples(std::size_t n_r, std::size_t n_theta) const {
  double worst = 0.0;
  for (double r : linear_grid(0.0, radii_.back(), n_r))
    for (std::size_t i = 0; i < n_theta; ++i)
      worst = std::max(worst, std::abs(u(r, 2 * std::numbers::pi * i / n_theta)));
  return worst;
}

json to_json(const HarmonicSolution& s) {
  json modes = json::array();
  for (const auto& r : s.reports()) {
    json changes = json::array();
    for (double c : r.changes) changes.push_back(json_number(c));
    modes.push_back({{"n", r.n},
                     {"attained", to_string(r.verdict)},
                     {"converged", r.converged},
                     {"changes", changes},
                     {"window_min", json_number(r.window_min)},
                     {"window_max", json_number(r.window_max)}});
  }
  const double sup_u = s.sup_abs_on_samples();
  const double bound = s.data().sup_norm();
  return {{"radii", s.radii()},
          {"data", to_json(s.data())},
          {"modes", modes},
          {"sup_norm_check",
           {{"sup_abs_u", json_number(sup_u)}, {"sup_norm", json_number(bound)}, {"pass", sup_u <= bound + 1e-9}}}};
}

void write_csv(std::ostream& os, const HarmonicSolution& s, std::size_t n_r, std::size_t n_theta) {
  os << "r,theta,u\n";
  os.precision(12);
  for (double r : linear_grid(0.0, s.radii().back(), n_r))
    for (std::size_t i = 0; i < n_theta; ++i) {
      const double th = 2 * std::numbers::pi * i / n_theta;
      os << r << ',' << th << ',' << s.u(r, th) << '\n';
    }
}

}  // namespace hadamard
