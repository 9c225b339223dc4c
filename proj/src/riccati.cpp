#include "hadamard/riccati.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

#include "hadamard/errors.hpp"

namespace hadamard::ode {

namespace {

// Radau IIA, three stages, order five.
const double kSqrt6 = std::sqrt(6.0);
const std::array<double, 3> kC = {(4.0 - kSqrt6) / 10.0, (4.0 + kSqrt6) / 10.0, 1.0};
const std::array<std::array<double, 3>, 3> kA = {{
    {(88.0 - 7.0 * kSqrt6) / 360.0, (296.0 - 169.0 * kSqrt6) / 1800.0, (-2.0 + 3.0 * kSqrt6) / 225.0},
    {(296.0 + 169.0 * kSqrt6) / 1800.0, (88.0 + 7.0 * kSqrt6) / 360.0, (-2.0 - 3.0 * kSqrt6) / 225.0},
    {(16.0 - kSqrt6) / 36.0, (16.0 + kSqrt6) / 36.0, 1.0 / 9.0},
}};

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

bool solve3(Mat3 m, Vec3& x) {
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (m[piv][col] == 0.0 || !std::isfinite(m[piv][col])) return false;
    std::swap(m[piv], m[col]);
    std::swap(x[piv], x[col]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 3; ++c) m[r][c] -= f * m[col][c];
      x[r] -= f * x[col];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double acc = x[r];
    for (int c = r + 1; c < 3; ++c) acc -= m[r][c] * x[c];
    x[r] = acc / m[r][r];
  }
  return true;
}

struct Step {
  double y;
  double increment;  // integral of y over the step
};

std::optional<Step> radau_step(const CoefficientFn& coeff, double s, double y, double h, bool keep_positive) {
  std::array<RiccatiCoefficients, 3> pq;
  for (int j = 0; j < 3; ++j) pq[j] = coeff(s + kC[j] * h);
  auto residual = [&](const Vec3& z, Vec3& res) {
    Vec3 f;
    for (int j = 0; j < 3; ++j) {
      const double u = y + z[j];
      f[j] = pq[j].p + pq[j].q * u - u * u;
    }
    double norm = 0.0;
    for (int i = 0; i < 3; ++i) {
      res[i] = z[i] - h * (kA[i][0] * f[0] + kA[i][1] * f[1] + kA[i][2] * f[2]);
      norm = std::max(norm, std::abs(res[i]));
    }
    return norm;
  };

  Vec3 z = {0.0, 0.0, 0.0};
  Vec3 res;
  double norm = residual(z, res);
  const double scale = 1.0 + std::abs(y);
  double prev_dnorm = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 60; ++it) {
    if (!std::isfinite(norm)) return std::nullopt;
    Mat3 jac;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        jac[i][j] = (i == j ? 1.0 : 0.0) - h * kA[i][j] * (pq[j].q - 2.0 * (y + z[j]));
    Vec3 dz = res;
    if (!solve3(jac, dz)) return std::nullopt;
    double dnorm = 0.0;
    for (double d : dz) dnorm = std::max(dnorm, std::abs(d));
    // Damped Newton: shrink until the residual drops.
    double lambda = 1.0;
    Vec3 trial;
    Vec3 trial_res;
    double trial_norm = 0.0;
    for (int k = 0; k < 30; ++k) {
      for (int i = 0; i < 3; ++i) trial[i] = z[i] - lambda * dz[i];
      trial_norm = residual(trial, trial_res);
      if (trial_norm < norm || trial_norm <= 1e-15 * scale) break;
      lambda *= 0.5;
    }
    z = trial;
    res = trial_res;
    norm = trial_norm;
    double zscale = scale;
    for (double v : z) zscale = std::max(zscale, std::abs(y + v));
    if (dnorm <= 1e-14 * zscale) break;
    // Stagnation at roundoff level counts as converged.
    if (dnorm <= 1e-10 * zscale && dnorm >= 0.5 * prev_dnorm) break;
    prev_dnorm = dnorm;
    if (it == 59) return std::nullopt;
  }
  if (keep_positive && y > 0.0)
    for (double v : z)
      if (!(y + v > 0.0)) return std::nullopt;
  Vec3 u = {y + z[0], y + z[1], y + z[2]};
  const double inc = h * (kA[2][0] * u[0] + kA[2][1] * u[1] + kA[2][2] * u[2]);
  if (!std::isfinite(u[2]) || !std::isfinite(inc)) return std::nullopt;
  return Step{u[2], inc};
}

}  // namespace

RiccatiTrajectory::RiccatiTrajectory(CoefficientFn coeff, std::vector<RiccatiNode> nodes, bool keep_positive)
    : coeff_(std::move(coeff)), nodes_(std::move(nodes)), keep_positive_(keep_positive) {
  if (nodes_.empty()) throw NumericError("empty trajectory");
}

RiccatiTrajectory::Value RiccatiTrajectory::at(double s) const {
  if (s < s_begin() || s > s_end())
    throw DomainError("trajectory queried at s=" + std::to_string(s) + " outside its range");
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s,
                             [](double v, const RiccatiNode& n) { return v < n.s; });
  const RiccatiNode& n = *(it - 1);
  if (s == n.s) return {n.y, n.integral};
  const double h = s - n.s;
  auto st = radau_step(coeff_, n.s, n.y, h, keep_positive_);
  if (!st) {
    // Fall back to two half steps, which always succeeded during integration.
    auto a = radau_step(coeff_, n.s, n.y, 0.5 * h, keep_positive_);
    if (!a) throw NumericError("dense output failed");
    auto b = radau_step(coeff_, n.s + 0.5 * h, a->y, 0.5 * h, keep_positive_);
    if (!b) throw NumericError("dense output failed");
    return {b->y, n.integral + a->increment + b->increment};
  }
  return {st->y, n.integral + st->increment};
}

RiccatiTrajectory integrate_riccati(CoefficientFn coeff, double s0, double y0, double s1,
                                    const RiccatiOptions& opts) {
  if (!(s1 > s0)) throw DomainError("integration interval is empty");
  if (!(opts.rtol > 0.0)) throw DomainError("rtol must be positive");
  std::vector<double> stops;
  for (double b : opts.breakpoints)
    if (b > s0 && b < s1) stops.push_back(b);
  stops.push_back(s1);
  std::sort(stops.begin(), stops.end());

  std::vector<RiccatiNode> nodes{{s0, y0, 0.0}};
  double s = s0, y = y0, integral = 0.0;
  double h = opts.first_step;
  std::size_t next_stop = 0;
  std::size_t steps = 0;
  while (s < s1) {
    if (++steps > opts.max_steps) throw IntegrationFailure("step budget exhausted", s);
    const double target = stops[next_stop];
    const double h_max = opts.max_step_rel * std::max(1.0, std::abs(s));
    h = std::min(h, h_max);
    bool lands = false;
    if (s + h >= target || target - (s + h) < 1e-3 * h) {
      h = target - s;
      lands = true;
    }
    auto big = radau_step(coeff, s, y, h, opts.keep_positive);
    std::optional<Step> half1, half2;
    if (big) half1 = radau_step(coeff, s, y, 0.5 * h, opts.keep_positive);
    if (half1) half2 = radau_step(coeff, s + 0.5 * h, half1->y, 0.5 * h, opts.keep_positive);
    double err = std::numeric_limits<double>::infinity();
    if (big && half1 && half2) {
      const double y_fine = half2->y;
      const double inc_fine = half1->increment + half2->increment;
      const double e_y = std::abs(big->y - y_fine) / (opts.atol + opts.rtol * std::abs(y_fine));
      const double e_i = std::abs(big->increment - inc_fine) /
                         (opts.rtol * std::max(1.0, std::abs(integral + inc_fine)));
      err = std::max(e_y, e_i);
    }
    if (err <= 1.0) {
      integral += half1->increment + half2->increment;
      y = half2->y;
      s = lands ? target : s + h;
      nodes.push_back({s, y, integral});
      if (lands) ++next_stop;
      const double grow = err == 0.0 ? 4.0 : std::min(4.0, 0.9 * std::pow(err, -1.0 / 6.0));
      h = h * std::max(1.0, grow);
    } else {
      const double shrink = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -1.0 / 6.0)) : 0.25;
      h *= shrink;
      if (h < opts.min_step * std::max(1.0, std::abs(s)))
        throw IntegrationFailure("step size underflow", s);
    }
  }
  return RiccatiTrajectory(std::move(coeff), std::move(nodes), opts.keep_positive);
}

}  // namespace hadamard::ode
