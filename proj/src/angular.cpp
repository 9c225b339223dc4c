#include "hadamard/angular.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "hadamard/errors.hpp"
#include "hadamard/quadrature.hpp"

namespace hadamard {

using nlohmann::json;

namespace {
constexpr double kPi = std::numbers::pi;

double sigma(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
}  // namespace

double MollifierKernel::chi(double s) {
  const double t = std::abs(s);
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  const double A = sigma(2.0 - t), C = sigma(t - 1.0);
  return A / (A + C);
}

double MollifierKernel::chi_prime(double s) {
  const double t = std::abs(s);
  if (t <= 1.0 || t >= 2.0) return 0.0;
  const double a = 2.0 - t, c = t - 1.0;
  const double A = sigma(a), C = sigma(c);
  const double den = (A + C) * (A + C);
  const double dt = -(A * (C / (c * c)) + (A / (a * a)) * C) / den;
  return s > 0 ? dt : -dt;
}

double tilde_h(const ConeSpec& cone, GeoPoint p) {
  const double radial = 2.0 - 2.0 * p.r;
  if (radial >= 1.0) return 1.0;  // angle undefined at the pole; clipped anyway
  const double ang = cone.L * std::abs(angle_difference(p.theta, cone.v0));
  return std::min(1.0, std::max(radial, ang));
}

PolarBox support_box(const RotSymSurface& S, const RadialFunction& b, GeoPoint p) {
  const double rho = p.r;
  const double limit = std::min(S.r_max(), b.t_max());
  // G(D) = 2 / min b over [rho - D, rho + D]; D is a valid support radius once D >= G(D') for all D' >= D
  auto G = [&](double D) {
    const double lo = std::max(0.0, rho - D), hi = rho + D;
    double bmin = std::min(b(lo), b(hi));
    for (int k = 1; k < 64; ++k) bmin = std::min(bmin, b(lo + (hi - lo) * k / 64.0));
    if (!(bmin > 0.0)) throw DegenerateProfile("mollifier scale b vanishes near r = " + std::to_string(rho));
    return 2.0 / bmin;
  };
  const double D0 = G(0.0);
  if (rho + D0 > limit) throw DomainError("mollifier support ball leaves the representable range");
  double last_bad = -1.0, D = D0;
  for (; D <= 1e4 * D0 && rho + D <= limit; D *= 1.1)
    if (G(D) > D) last_bad = D;
  if (last_bad >= 0.0) {
    double lo = last_bad, hi = last_bad * 1.1;
    if (rho + hi > limit || G(hi) > hi) throw DomainError("mollifier support ball leaves the representable range");
    for (int i = 0; i < 50; ++i) {
      const double mid = 0.5 * (lo + hi);
      (G(mid) > mid ? lo : hi) = mid;
    }
    D = hi;
  } else {
    D = D0;
  }
  PolarBox box{std::max(0.0, rho - D), rho + D, kPi, D};
  if (rho - D > 0.0) box.half_width = std::min(kPi, std::exp(std::log(D) - S.log_f(rho - D)));
  return box;
}

AngularExtension::AngularExtension(RotSymSurface surface, RadialFunction b, ConeSpec cone, double quad_tol,
                                   ScalarField phi)
    : surface_(std::move(surface)), b_(std::move(b)), cone_(cone), quad_tol_(quad_tol), phi_(std::move(phi)) {
  if (!(quad_tol > 0.0 && quad_tol < 1.0)) throw DomainError("quad_tol must lie in (0, 1)");
  if (surface_.dim() != 2) throw DomainError("angular extension is implemented for 2-d surfaces only");
  if (!phi_) phi_ = [c = cone_](GeoPoint p) { return tilde_h(c, p); };
}

PolarBox AngularExtension::support_box(GeoPoint p) const { return hadamard::support_box(surface_, b_, p); }

namespace {

// Largest |psi| <= cap with d(x, (r, theta_x + psi)) <= level; -1 if none (d grows with |psi|).
double half_angle_within(const RotSymSurface& S, GeoPoint x, double r, double level, double cap) {
  auto dist = [&](double p) { return fast_distance(S, x, GeoPoint::make(r, x.theta + p)).d - level; };
  if (dist(0.0) >= 0.0) return -1.0;
  if (dist(cap) <= 0.0) return cap;
  boost::uintmax_t it = 100;
  auto br = boost::math::tools::toms748_solve(dist, 0.0, cap, boost::math::tools::eps_tolerance<double>(40), it);
  return br.second;
}

// integral over the polar box of g(r, theta) * f(r)/f(rho) dr dtheta, with kinks split out
template <std::size_t N, class G>
std::array<double, N> box_integral(const RotSymSurface& S, const RadialFunction& b, const ConeSpec& cone, GeoPoint x,
                                   const PolarBox& box, G&& g, double rel, const std::array<double, N>& abs) {
  const double L_rho = x.r > 0.0 ? S.log_f(x.r) : 0.0;
  std::vector<double> psi;
  for (double c : {0.0, 1.0 / cone.L, -1.0 / cone.L}) {
    const double k = angle_difference(cone.v0 + c, x.theta);
    if (k > -box.half_width && k < box.half_width) psi.push_back(k);
  }
  std::vector<double> rs{box.r_lo, box.r_hi};
  for (double c : {0.5, 1.0})
    if (c > box.r_lo && c < box.r_hi) rs.push_back(c);
  // plateau edge of the kernel on the radial line through x: |r - rho| b(r) = 1
  {
    auto edge = [&](double r) { return std::abs(r - x.r) * b(r) - 1.0; };
    const auto tol = boost::math::tools::eps_tolerance<double>(45);
    for (auto [lo, hi] : {std::pair{box.r_lo, x.r}, std::pair{x.r, box.r_hi}}) {
      if (!(hi > lo) || edge(lo) * edge(hi) >= 0.0) continue;
      boost::uintmax_t it = 100;
      auto br = boost::math::tools::toms748_solve(edge, lo, hi, tol, it);
      rs.push_back(0.5 * (br.first + br.second));
    }
  }
  std::sort(rs.begin(), rs.end());

  auto radial = [&](double r) {
    std::array<double, N> acc{};
    if (r <= 0.0) return acc;
    const double reach = 2.0 / b(r);
    // d(x, (r, theta_x + psi)) increases with |psi|; cut where b d crosses 1 and 2
    auto crossing = [&](double level, double hi) { return half_angle_within(S, x, r, level, hi); };
    const double pm = crossing(reach, box.half_width);
    if (pm <= 0.0) return acc;
    std::vector<double> cuts{-pm, pm};
    const double p1 = crossing(0.5 * reach, pm);
    if (p1 > 0.0 && p1 < pm) {
      cuts.push_back(-p1);
      cuts.push_back(p1);
    }
    for (double k : psi)
      if (k > -pm && k < pm) cuts.push_back(k);
    std::sort(cuts.begin(), cuts.end());
    const double w = std::exp(S.log_f(r) - L_rho);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      auto inner = quad::integrate<N>([&](double p) { return g(r, x.theta + p); }, cuts[i], cuts[i + 1], rel, abs);
      for (std::size_t k = 0; k < N; ++k) acc[k] += w * inner.value[k];
    }
    return acc;
  };
  std::array<double, N> total{};
  for (std::size_t i = 0; i + 1 < rs.size(); ++i) {
    auto outer = quad::integrate<N>(radial, rs[i], rs[i + 1], rel, abs);
    if (!outer.converged) throw NumericError("mollifier quadrature did not reach its tolerance");
    for (std::size_t k = 0; k < N; ++k) total[k] += outer.value[k];
  }
  return total;
}

double area_scale(const PolarBox& box) { return box.support * box.support; }

}  // namespace

double AngularExtension::R(GeoPoint p, const ScalarField& phi) const {
  p = GeoPoint::make(p.r, p.theta);
  const PolarBox box = support_box(p);
  const double rel = 1e-2 * quad_tol_;
  auto g = [&](double r, double th) -> std::array<double, 1> {
    const GeoPoint y = GeoPoint::make(r, th);
    const double s = b_(r) * fast_distance(surface_, p, y).d;
    if (s >= 2.0) return {0.0};
    return {MollifierKernel::chi(s) * phi(y)};
  };
  const double L_rho = p.r > 0.0 ? surface_.log_f(p.r) : 0.0;
  return std::exp(L_rho) * box_integral<1>(surface_, b_, cone_, p, box, g, rel, {1e-14 * area_scale(box)})[0];
}

namespace {

struct ValuePass {
  double h;
  double R1;
};

ValuePass value_pass(const AngularExtension& A, GeoPoint p, const PolarBox& box, const ScalarField& phi, double rel) {
  const auto& S = A.surface();
  const auto& b = A.b();
  auto g = [&](double r, double th) -> std::array<double, 2> {
    const GeoPoint y = GeoPoint::make(r, th);
    const double s = b(r) * fast_distance(S, p, y).d;
    if (s >= 2.0) return {0.0, 0.0};
    const double k = MollifierKernel::chi(s);
    return {k * phi(y), k};
  };
  auto v = box_integral<2>(S, b, A.cone(), p, box, g, rel, {1e-14 * area_scale(box), 1e-14 * area_scale(box)});
  if (!(v[1] > 0.0)) throw NumericError("R(1) vanished");
  return {v[0] / v[1], v[1]};
}

}  // namespace

double AngularExtension::mollify(GeoPoint p, const ScalarField& phi) const {
  p = GeoPoint::make(p.r, p.theta);
  return value_pass(*this, p, support_box(p), phi, 1e-2 * quad_tol_).h;
}

double AngularExtension::value(GeoPoint p) const { return mollify(p, phi_); }

namespace {

struct Gradient {
  double h, dr, dtheta;
};

Gradient gradient(const AngularExtension& A, GeoPoint p, const ScalarField& phi) {
  const auto& S = A.surface();
  const auto& b = A.b();
  p = GeoPoint::make(p.r, p.theta);
  const PolarBox box = support_box(S, b, p);
  const double rel = std::min(1e-2 * A.quad_tol(), 1e-7);
  // R(phi), R(1) and their coordinate gradients in one sweep
  auto g = [&](double r, double th) -> std::array<double, 6> {
    const GeoPoint y = GeoPoint::make(r, th);
    const double br = b(r);
    const DistanceResult d = fast_distance(S, p, y);
    const double s = br * d.d;
    if (s >= 2.0) return {};
    const double k = MollifierKernel::chi(s), v = phi(y);
    const double kp = s > 1.0 ? MollifierKernel::chi_prime(s) * br : 0.0;
    return {k * v, k, kp * v * d.dd_dr, kp * d.dd_dr, kp * v * d.dd_dtheta, kp * d.dd_dtheta};
  };
  // gradient parts are judged on the scale of grad h times R(1), roughly b * area
  const double va = 1e-14 * area_scale(box), ga = 1e-10 * area_scale(box) * b(p.r);
  const auto I = box_integral<6>(S, b, A.cone(), p, box, g, rel, {va, va, ga, ga, ga, ga});
  if (!(I[1] > 0.0)) throw NumericError("R(1) vanished");
  const double h = I[0] / I[1];
  return {h, (I[2] - h * I[3]) / I[1], (I[4] - h * I[5]) / I[1]};
}

struct Hessian {
  double norm;
  double mixed_gap;  // disagreement of the two mixed partials
  double mixed;
};

Hessian hessian(const AngularExtension& A, GeoPoint p, const Gradient& g0, const ScalarField& phi, double delta) {
  const auto& S = A.surface();
  const double f = std::exp(S.log_f(p.r)), u = S.u(p.r);
  const double dth = delta / f;
  const Gradient rp = gradient(A, {p.r + delta, p.theta}, phi), rm = gradient(A, {p.r - delta, p.theta}, phi);
  const Gradient tp = gradient(A, {p.r, p.theta + dth}, phi), tm = gradient(A, {p.r, p.theta - dth}, phi);
  const double h_rr = (rp.dr - rm.dr) / (2 * delta);
  const double h_rt1 = (rp.dtheta - rm.dtheta) / (2 * delta), h_rt2 = (tp.dr - tm.dr) / (2 * dth);
  const double h_rt = 0.5 * (h_rt1 + h_rt2);
  const double h_tt = (tp.dtheta - tm.dtheta) / (2 * dth);
  // orthonormal frame (e_r, e_theta / f) with Christoffel corrections
  const double H11 = h_rr;
  const double H12 = (h_rt - u * g0.dtheta) / f;
  const double H22 = h_tt / (f * f) + u * g0.dr;
  const double mean = 0.5 * (H11 + H22), half = 0.5 * (H11 - H22);
  return {std::abs(mean) + std::sqrt(half * half + H12 * H12), std::abs(h_rt1 - h_rt2) / f,
          std::max(std::abs(h_rt1), std::abs(h_rt2)) / f};
}

}  // namespace

AngularJet AngularExtension::jet(GeoPoint p, bool with_hessian) const {
  p = GeoPoint::make(p.r, p.theta);
  const Gradient g = gradient(*this, p, phi_);
  AngularJet j;
  j.h = g.h;
  j.dr = g.dr;
  j.dtheta = g.dtheta;
  if (p.r > 0.0) {
    const double f = std::exp(surface_.log_f(p.r));
    j.grad_norm = std::hypot(g.dr, g.dtheta / f);
  } else {
    j.grad_norm = std::abs(g.dr);
  }
  if (!with_hessian) return j;
  if (!(p.r > 0.0)) throw DomainError("Hessian in polar coordinates is not available at the pole");
  const double br = b_(p.r);
  const double delta = std::min(std::cbrt(quad_tol_) / br, 0.25 * p.r);
  const Hessian H = hessian(*this, p, g, phi_, delta);
  const double floor = 1e-3 * j.grad_norm * br + 1e-10 * br * br;
  if (H.mixed_gap > 0.2 * H.mixed + floor)
    throw NumericError("finite-difference Hessian is dominated by quadrature noise at r = " + std::to_string(p.r));
  j.hess_norm = H.norm;
  return j;
}

double AngularExtension::computed_radius() const {
  const double half = 1.0 / cone_.L;
  auto ok = [&](double rho) {
    const PolarBox box = support_box({rho, cone_.v0 + 2.0 * half});
    if (box.r_lo <= 0.0) return false;
    return box.half_width <= half;
  };
  const double step = 0.05, cap = 400.0;
  double last_fail = 0.0, rho = 0.0;
  bool any_ok = false;
  for (; rho <= cap; rho += step) {
    bool good;
    try {
      good = ok(rho);
    } catch (const DomainError&) {
      break;  // range exhausted
    }
    if (good) {
      any_ok = true;
    } else {
      last_fail = rho;
      any_ok = false;
    }
  }
  if (!any_ok) throw NumericError("no radius found beyond which h = 1 outside the double cone");
  double lo = last_fail, hi = last_fail + step;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

// ---------------------------------------------------------------------------

namespace {

double final_window_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  const std::size_t m = std::max<std::size_t>(3, n / 3);
  const std::size_t start = n > m ? n - m : 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t k = 0;
  for (std::size_t i = start; i < n; ++i) {
    if (!(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++k;
  }
  if (k < 2) return 0.0;  // identically zero field
  const double den = k * sxx - sx * sx;
  return den > 0.0 ? (k * sxy - sx * sy) / den : 0.0;
}

}  // namespace

DecayReport decay_check(const AngularExtension& field, const JacobiSolution& sol_a, double lambda, double t0,
                        DecayVariant variant, std::span<const double> rho_grid, std::span<const double> ray_offsets) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("lambda must lie in (0, 1)");
  if (rho_grid.size() < 3) throw DomainError("decay check needs at least three radii");
  const double L = field.cone().L;
  for (double off : ray_offsets)
    if (!(std::abs(off) < 3.0 / L)) throw DomainError("decay samples must lie inside 3*cone");
  const double R1 = field.computed_radius();
  DecayReport rep;
  for (double rho : rho_grid) {
    if (rho < R1) throw DomainError("decay samples must lie beyond the computed radius " + std::to_string(R1));
    const double arg = variant == DecayVariant::general ? lambda * rho : rho - t0;
    if (!(arg > 0.0)) throw DomainError("comparison radius must be positive");
    const double log_fa = sol_a.log_f(arg);
    const double br = field.b()(rho);
    double cg = 0.0, ch = 0.0;
    for (double off : ray_offsets) {
      const GeoPoint p = GeoPoint::make(rho, field.cone().v0 + off);
      const AngularJet j = field.jet(p, true);
      const double gr = j.grad_norm * std::exp(log_fa);
      const double hr = *j.hess_norm * std::exp(log_fa) / br;
      rep.samples.push_back({p, j.h, gr, hr});
      cg = std::max(cg, gr);
      ch = std::max(ch, hr);
    }
    rep.rho.push_back(rho);
    rep.c4_grad.push_back(cg);
    rep.c4_hess.push_back(ch);
    rep.sup_grad = std::max(rep.sup_grad, cg);
    rep.sup_hess = std::max(rep.sup_hess, ch);
  }
  rep.slope_grad = final_window_slope(rep.rho, rep.c4_grad);
  rep.slope_hess = final_window_slope(rep.rho, rep.c4_hess);
  rep.pass = std::isfinite(rep.sup_grad) && std::isfinite(rep.sup_hess) && rep.slope_grad <= 0.05 &&
             rep.slope_hess <= 0.05;
  return rep;
}

void write_csv(std::ostream& os, const DecayReport& r) {
  os << "r,theta,h,grad_bound_ratio,hess_bound_ratio\n";
  char buf[160];
  for (const auto& s : r.samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", s.p.r, s.p.theta, s.h, s.grad_ratio,
                  s.hess_ratio);
    os << buf;
  }
}

VahApuReport vah_apu_check(const RotSymSurface& S, const RadialFunction& b, std::size_t n_pairs, double rho_lo,
                           double rho_hi, std::uint64_t seed) {
  if (!(rho_lo >= 0.0 && rho_hi > rho_lo)) throw DomainError("bad radius range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  VahApuReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_ratio = 0.0;
  while (rep.pairs < n_pairs) {
    const GeoPoint x = GeoPoint::make(rho_lo + (rho_hi - rho_lo) * U(rng), 2 * kPi * U(rng));
    const PolarBox box = support_box(S, b, x);
    bool found = false;
    for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
      const double r = box.r_lo + (box.r_hi - box.r_lo) * U(rng);
      if (!(r > 0.0)) continue;
      const double pm = half_angle_within(S, x, r, 2.0 / b(r), box.half_width);
      if (pm < 0.0) continue;
      const GeoPoint y = GeoPoint::make(r, x.theta + pm * (2 * U(rng) - 1));
      if (b(r) * fast_distance(S, x, y).d > 2.0 * (1.0 + 1e-9)) continue;
      const double ratio = b(r) / b(x.r);
      rep.min_ratio = std::min(rep.min_ratio, ratio);
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      found = true;
    }
    if (!found) throw NumericError("could not sample a point inside the kernel support");
    ++rep.pairs;
  }
  rep.c = std::max(rep.max_ratio, 1.0 / rep.min_ratio);
  return rep;
}

json to_json(const DecayReport& r) {
  return {{"rho", r.rho},         {"c4_grad", r.c4_grad},       {"c4_hess", r.c4_hess},
          {"sup_grad", r.sup_grad}, {"sup_hess", r.sup_hess},   {"slope_grad", r.slope_grad},
          {"slope_hess", r.slope_hess}, {"pass", r.pass}};
}

json to_json(const VahApuReport& r) {
  return {{"pairs", r.pairs}, {"min_ratio", r.min_ratio}, {"max_ratio", r.max_ratio}, {"c", r.c}};
}

}  // namespace hadamard
