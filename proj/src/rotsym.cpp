#include "hadamard/rotsym.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>

#include "hadamard/errors.hpp"
#include "hadamard/quadrature.hpp"

namespace hadamard {

using nlohmann::json;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double x_coth_x(double x) {
  if (std::abs(x) < 1e-4) return 1.0 + x * x / 3.0;
  return x / std::tanh(x);
}

double log_sinh(double x) {
  if (x > 20.0) return x - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * x));
  return std::log(std::sinh(x));
}
}  // namespace

GeoPoint GeoPoint::make(double r, double theta) {
  if (!std::isfinite(r) || r < 0.0) throw DomainError("GeoPoint radius must be finite and >= 0");
  if (!std::isfinite(theta)) throw DomainError("GeoPoint angle must be finite");
  double t = std::fmod(theta, 2.0 * kPi);
  if (t < 0.0) t += 2.0 * kPi;
  if (t >= 2.0 * kPi) t = 0.0;
  return {r, t};
}

double angle_difference(double a, double b) {
  double d = std::remainder(a - b, 2.0 * kPi);  // [-pi, pi]
  if (d <= -kPi) d += 2.0 * kPi;
  return d;
}

RotSymSurface::RotSymSurface(Kind kind, double kappa, std::shared_ptr<const JacobiSolution> sol, int dim)
    : kind_(kind), kappa_(kappa), sol_(std::move(sol)), dim_(dim) {
  if (dim_ < 2) throw DomainError("surface dimension must be >= 2");
}

RotSymSurface RotSymSurface::hyperbolic(double kappa, int dim) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be positive");
  return RotSymSurface(Kind::hyperbolic, kappa, nullptr, dim);
}

RotSymSurface RotSymSurface::euclidean(int dim) { return RotSymSurface(Kind::euclidean, 0.0, nullptr, dim); }

RotSymSurface RotSymSurface::from_jacobi(std::shared_ptr<const JacobiSolution> sol, int dim) {
  if (!sol) throw DomainError("null Jacobi solution");
  return RotSymSurface(Kind::jacobi, 0.0, std::move(sol), dim);
}

double RotSymSurface::r_max() const { return kind_ == Kind::jacobi ? sol_->t_max() : kInf; }

double RotSymSurface::log_f(double r) const {
  if (r < 0.0) throw DomainError("negative radius");
  if (r == 0.0) return -kInf;
  switch (kind_) {
    case Kind::hyperbolic: return log_sinh(kappa_ * r) - std::log(kappa_);
    case Kind::euclidean: return std::log(r);
    case Kind::jacobi: return sol_->log_f(r);
  }
  return 0.0;
}

double RotSymSurface::f(double r) const { return std::exp(log_f(r)); }

double RotSymSurface::u(double r) const {
  if (r < 0.0) throw DomainError("negative radius");
  if (r == 0.0) return kInf;
  switch (kind_) {
    case Kind::hyperbolic: return kappa_ / std::tanh(kappa_ * r);
    case Kind::euclidean: return 1.0 / r;
    case Kind::jacobi: return sol_->u(r);
  }
  return 0.0;
}

double RotSymSurface::f_prime(double r) const {
  switch (kind_) {
    case Kind::hyperbolic: return std::cosh(kappa_ * r);
    case Kind::euclidean: return 1.0;
    case Kind::jacobi: return sol_->f_prime(r);
  }
  return 0.0;
}

double RotSymSurface::log_f_increment(double r, double delta) const {
  if (delta < 0.0 || r < 0.0) throw DomainError("log_f_increment needs r, delta >= 0");
  if (delta == 0.0) return 0.0;
  if (r == 0.0) return kInf;
  switch (kind_) {
    case Kind::hyperbolic: {
      const double x = kappa_ * r, y = kappa_ * delta;
      if (y < 1.0) {
        const double sh = std::sinh(0.5 * y);
        return std::log1p(2.0 * sh * sh + std::sinh(y) / std::tanh(x));
      }
      return log_f(r + delta) - log_f(r);
    }
    case Kind::euclidean: return std::log1p(delta / r);
    case Kind::jacobi:
      if (delta <= 1e-2 * std::min(1.0, r)) {
        // Simpson on u; error ~ delta^5
        return delta / 6.0 * (sol_->u(r) + 4.0 * sol_->u(r + 0.5 * delta) + sol_->u(r + delta));
      }
      return sol_->log_f(r + delta) - sol_->log_f(r);
  }
  return 0.0;
}

double RotSymSurface::log_f_at_log(double s) const {
  switch (kind_) {
    case Kind::hyperbolic: return log_f(std::exp(s));
    case Kind::euclidean: return s;
    case Kind::jacobi: return sol_->log_f_at_log(s);
  }
  return 0.0;
}

double RotSymSurface::w_at_log(double s) const {
  switch (kind_) {
    case Kind::hyperbolic: return x_coth_x(kappa_ * std::exp(s));
    case Kind::euclidean: return 1.0;
    case Kind::jacobi: return sol_->w_at_log(s);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Clairaut distance

namespace {

struct Sweep {
  double theta = 0.0;
  double length = 0.0;
};

// Geodesic piece from radius `base`, where rho = c/f equals sigma_base, out to r_end.
// Substitution r = base + x^2 removes the square-root singularity at a turning point.
Sweep sweep(const RotSymSurface& S, double base, double log_sigma, double r_end) {
  if (!(r_end > base)) return {};
  const double L_base = S.log_f(base);
  const double X = std::sqrt(r_end - base);
  const double limit = std::sqrt(2.0 / S.u(base));  // 2x w as x -> 0 with sigma = 1
  auto g = [&](double x) -> std::array<double, 2> {
    const double dL = S.log_f_increment(base, x * x);
    const double lr = log_sigma - dL;
    const double om = -std::expm1(2.0 * lr);
    double len;
    if (!(om > 0.0)) {
      len = limit;
    } else {
      len = 2.0 * x / std::sqrt(om);
    }
    return {len * std::exp(lr - L_base - dL), len};
  };
  // interpolated solutions carry ~rtol noise; asking for more only burns segments
  const double rel = S.kind() == RotSymSurface::Kind::jacobi ? 1e-10 : 1e-13;
  auto res = quad::integrate<2>(g, 0.0, X, rel, 1e-15, 400);
  return {res.value[0], res.value[1]};
}

struct Shot {
  double theta, length, log_c;
  bool turning;
};

// sigma in [0, 2): <= 1 monotone in r, > 1 turns at r_m = (2 - sigma) r_s.
Shot shoot(const RotSymSurface& S, double r_s, double r_l, double sigma) {
  if (sigma <= 1.0) {
    const double ls = sigma > 0.0 ? std::log(sigma) : -kInf;
    const Sweep a = sweep(S, r_s, ls, r_l);
    return {a.theta, a.length, ls + S.log_f(r_s), false};
  }
  const double r_m = (2.0 - sigma) * r_s;
  const Sweep a = sweep(S, r_m, 0.0, r_s);
  const Sweep b = sweep(S, r_m, 0.0, r_l);
  return {a.theta + b.theta, a.length + b.length, S.log_f(r_m), true};
}

double radial_slope(const RotSymSurface& S, double log_c, double r) {
  const double e = 2.0 * (log_c - S.log_f(r));
  return e >= 0.0 ? 0.0 : std::sqrt(-std::expm1(e));
}

void check_range(const RotSymSurface& S, GeoPoint p) {
  if (p.r > S.r_max()) throw DomainError("point radius beyond the surface range");
}

}  // namespace

DistanceResult distance_with_gradient(const RotSymSurface& S, GeoPoint p, GeoPoint q) {
  p = GeoPoint::make(p.r, p.theta);
  q = GeoPoint::make(q.r, q.theta);
  check_range(S, p);
  check_range(S, q);
  const double dth = angle_difference(p.theta, q.theta);
  const double adth = std::abs(dth);

  if (q.r == 0.0) return {p.r, 1.0, 0.0};
  if (p.r == 0.0) return {q.r, -std::cos(dth), 0.0};
  if (adth == 0.0) {
    const double diff = p.r - q.r;
    return {std::abs(diff), diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0), 0.0};
  }

  const bool p_small = p.r <= q.r;
  const double r_s = std::min(p.r, q.r), r_l = std::max(p.r, q.r);
  const double sigma_hi = 2.0 - 1e-14;

  if (adth >= kPi || shoot(S, r_s, r_l, sigma_hi).theta < adth) {
    return {p.r + q.r, 1.0, 0.0};  // through the pole
  }

  auto g = [&](double sigma) { return shoot(S, r_s, r_l, sigma).theta - adth; };
  boost::uintmax_t iters = 200;
  const auto tol = boost::math::tools::eps_tolerance<double>(50);
  const auto [lo, hi] = boost::math::tools::toms748_solve(g, 0.0, sigma_hi, -adth, g(sigma_hi), tol, iters);
  const double sigma = 0.5 * (lo + hi);
  const Shot shot = shoot(S, r_s, r_l, sigma);
  const double resid = shot.theta - adth;
  if (iters >= 200 || std::abs(resid) > 1e-8 * std::max(1.0, adth)) {
    throw NumericError("Clairaut shooting did not converge; angular residual " + std::to_string(resid));
  }

  const double c = std::exp(shot.log_c);
  const double slope_p = radial_slope(S, shot.log_c, p.r);
  double dd_dr = slope_p;
  if (!shot.turning && p_small && p.r != q.r) dd_dr = -slope_p;
  const double dd_dtheta = dth > 0 ? c : -c;
  return {shot.length, dd_dr, dd_dtheta};
}

double distance(const RotSymSurface& S, GeoPoint p, GeoPoint q) { return distance_with_gradient(S, p, q).d; }

DistanceResult fast_distance(const RotSymSurface& S, GeoPoint p, GeoPoint q) {
  if (S.kind() == RotSymSurface::Kind::jacobi) return distance_with_gradient(S, p, q);
  p = GeoPoint::make(p.r, p.theta);
  q = GeoPoint::make(q.r, q.theta);
  const double dth = angle_difference(p.theta, q.theta);
  const double s2 = std::sin(0.5 * dth) * std::sin(0.5 * dth);
  if (S.kind() == RotSymSurface::Kind::euclidean) {
    const double dr = p.r - q.r;
    const double d = std::sqrt(dr * dr + 4.0 * p.r * q.r * s2);
    if (d == 0.0) return {0.0, 0.0, 0.0};
    return {d, (dr + 2.0 * q.r * s2) / d, p.r * q.r * std::sin(dth) / d};
  }
  const double k = S.kappa();
  const double a = k * p.r, b = k * q.r;
  const double sh = std::sinh(0.5 * (a - b));
  const double S2 = sh * sh + std::sinh(a) * std::sinh(b) * s2;
  const double half = std::asinh(std::sqrt(S2));
  const double d = 2.0 * half / k;
  if (d == 0.0) return {0.0, 0.0, 0.0};
  const double denom = 0.5 * k * std::sinh(2.0 * half);
  const double dS_dr = k * (0.5 * std::sinh(a - b) + std::cosh(a) * std::sinh(b) * s2);
  const double dS_dth = 0.5 * std::sinh(a) * std::sinh(b) * std::sin(dth);
  return {d, dS_dr / denom, dS_dth / denom};
}

double angular_gradient_bound(const RotSymSurface& S, GeoPoint p) {
  if (!(p.r > 0.0)) throw DomainError("angular gradient is singular at the pole");
  check_range(S, p);
  return std::exp(-S.log_f(p.r));
}

// ---------------------------------------------------------------------------
// volumes

double unit_ball_volume(int k) {
  if (k < 1) throw DomainError("dimension must be >= 1");
  return std::pow(kPi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

namespace {

// log of int_0^t f^{k-1}, and J = that integral / f(t)^{k-1}
struct PowerIntegral {
  double log_value;
  double J;
};

PowerIntegral power_integral(const RotSymSurface& S, int k, double t) {
  if (k < 2 || k > S.dim()) throw DomainError("k must satisfy 2 <= k <= dim");
  if (!(t >= 0.0)) throw DomainError("radius must be >= 0");
  if (t > S.r_max()) throw DomainError("radius beyond the surface range");
  if (t == 0.0) return {-kInf, 0.0};
  const double m = k - 1.0;
  const double Lt = S.log_f(t);
  auto g = [&](double s) { return s <= 0.0 ? 0.0 : std::exp(m * (S.log_f(s) - Lt)); };
  // integrand increases in s; march down from t in doubling pieces
  const double width = std::min(t, 1.0 / (m * S.u(t)));
  double sum = quad::integrate_scalar(g, t - width, t, 1e-13);
  double hi = t - width, step = width;
  while (hi > 0.0) {
    const double lo = std::max(0.0, hi - step);
    sum += quad::integrate_scalar(g, lo, hi, 1e-13);
    if (lo == 0.0) break;
    if (lo * g(lo) <= 1e-17 * sum) break;
    hi = lo;
    step *= 2.0;
  }
  return {m * Lt + std::log(sum), sum};
}

}  // namespace

double log_ball_volume(const RotSymSurface& S, int k, double t) {
  return std::log(k * unit_ball_volume(k)) + power_integral(S, k, t).log_value;
}

double ball_volume(const RotSymSurface& S, int k, double t) { return std::exp(log_ball_volume(S, k, t)); }

double cone_mass(const RotSymSurface& S, double gamma_measure, int k, double t) {
  if (!(gamma_measure > 0.0)) throw DomainError("gamma_measure must be positive");
  return std::exp(std::log(gamma_measure) + power_integral(S, k, t).log_value);
}

MassRatioSeries MassRatioSeries::make(std::vector<double> t, std::vector<double> mass, std::vector<double> ball_vol) {
  if (t.size() != mass.size() || t.size() != ball_vol.size()) throw DomainError("mass-ratio series grids differ");
  MassRatioSeries s{std::move(t), std::move(mass), std::move(ball_vol), {}};
  s.ratio.resize(s.t.size());
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    if (i > 0 && !(s.t[i] > s.t[i - 1])) throw DomainError("mass-ratio grid must increase");
    if (!(s.ball_vol[i] > 0.0)) throw DegenerateProfile("ball volume vanishes on the grid");
    s.ratio[i] = s.mass[i] / s.ball_vol[i];
  }
  return s;
}

MassRatioSeries mass_ratio_series(const RotSymSurface& S, int k, std::span<const double> t_grid,
                                  const std::function<double(double)>& mass) {
  std::vector<double> t(t_grid.begin(), t_grid.end()), m, b;
  for (double ti : t) {
    if (!(ti > 0.0)) throw DomainError("mass-ratio grid must be positive");
    m.push_back(mass(ti));
    b.push_back(ball_volume(S, k, ti));
  }
  return MassRatioSeries::make(std::move(t), std::move(m), std::move(b));
}

MonotonicityReport monotonicity_check(const MassRatioSeries& s) {
  if (s.ratio.size() != s.t.size()) throw DomainError("mass-ratio series grids differ");
  MonotonicityReport r{0.0, true};
  for (std::size_t i = 0; i + 1 < s.ratio.size(); ++i)
    r.max_violation = std::max(r.max_violation, s.ratio[i] - s.ratio[i + 1]);
  r.pass = r.max_violation <= 1e-8;
  return r;
}

ConeInequalityReport cone_inequality_check(const RotSymSurface& S, int k, std::span<const double> t_grid,
                                           const std::function<double(double)>& total_mass) {
  ConeInequalityReport r{-kInf, 0.0, true, true};
  if (t_grid.empty()) throw DomainError("empty grid");
  for (double t : t_grid) {
    if (!(t > 0.0)) throw DegenerateProfile("beta_k' vanishes at t = 0");
    const double h = std::min(1e-3 * std::max(1.0, t), 0.25 * t);
    const double d1 = total_mass(t + h) - total_mass(t - h);
    const double d2 = total_mass(t + 2 * h) - total_mass(t - 2 * h);
    const double mp = (8.0 * d1 - d2) / (12.0 * h);
    const double m = total_mass(t);
    const double J = power_integral(S, k, t).J;  // beta_k / beta_k'
    const double excess = m - J * mp;
    const double scale = std::max(std::abs(m), 1e-300);
    r.max_excess = std::max(r.max_excess, excess);
    r.max_rel_gap = std::max(r.max_rel_gap, std::abs(excess) / scale);
    if (excess > 1e-6 * scale) r.holds = false;
    if (std::abs(excess) > 1e-6 * scale) r.equality = false;
  }
  return r;
}

json to_json(const MonotonicityReport& r) { return {{"max_violation", r.max_violation}, {"pass", r.pass}}; }

json to_json(const ConeInequalityReport& r) {
  return {{"max_excess", r.max_excess}, {"max_rel_gap", r.max_rel_gap}, {"holds", r.holds}, {"equality", r.equality}};
}

}  // namespace hadamard
