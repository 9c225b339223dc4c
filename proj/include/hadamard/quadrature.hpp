#pragma once

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "hadamard/errors.hpp"

namespace hadamard::quad {

// Globally adaptive Gauss-Kronrod (7/15) for vector-valued integrands; Boost supplies the nodes.
template <std::size_t N>
struct Result {
  std::array<double, N> value{};
  std::array<double, N> error{};
  bool converged = false;
};

template <std::size_t N, class F>
Result<N> integrate(F&& f, double a, double b, double rel_tol, const std::array<double, N>& abs_tol,
                    int max_segments = 4000) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  using G = boost::math::quadrature::gauss<double, 7>;
  const auto& xk = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G::weights();

  struct Segment {
    double a, b;
    std::array<double, N> value, error;
    double score;
  };
  auto rule = [&](double lo, double hi) {
    Segment s{lo, hi, {}, {}, 0.0};
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    constexpr std::size_t M = 15;
    std::array<std::array<double, N>, M> fv;
    std::array<double, M> wkv{}, wgv{};
    fv[0] = f(c);
    wkv[0] = wk[0];
    wgv[0] = wg[0];
    for (std::size_t j = 1; j < xk.size(); ++j) {
      fv[2 * j - 1] = f(c - h * xk[j]);
      fv[2 * j] = f(c + h * xk[j]);
      wkv[2 * j - 1] = wkv[2 * j] = wk[j];
      wgv[2 * j - 1] = wgv[2 * j] = (j % 2 == 0) ? wg[j / 2] : 0.0;
    }
    for (std::size_t i = 0; i < N; ++i) {
      double kron = 0.0, gauss = 0.0, absk = 0.0;
      for (std::size_t m = 0; m < M; ++m) {
        kron += wkv[m] * fv[m][i];
        gauss += wgv[m] * fv[m][i];
        absk += wkv[m] * std::abs(fv[m][i]);
      }
      // QUADPACK error scaling
      const double mean = 0.5 * kron;
      double asc = 0.0;
      for (std::size_t m = 0; m < M; ++m) asc += wkv[m] * std::abs(fv[m][i] - mean);
      asc *= std::abs(h);
      double err = std::abs(h * (kron - gauss));
      if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
      err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * std::abs(h) * absk);
      s.value[i] = h * kron;
      s.error[i] = err;
    }
    return s;
  };

  std::vector<Segment> segs{rule(a, b)};
  Result<N> out;
  for (;;) {
    out.value.fill(0.0);
    out.error.fill(0.0);
    for (const auto& s : segs)
      for (std::size_t i = 0; i < N; ++i) {
        out.value[i] += s.value[i];
        out.error[i] += s.error[i];
      }
    std::array<double, N> tol;
    bool ok = true;
    for (std::size_t i = 0; i < N; ++i) {
      tol[i] = std::max(abs_tol[i], rel_tol * std::abs(out.value[i]));
      if (!(out.error[i] <= tol[i])) ok = false;
    }
    if (ok) {
      out.converged = true;
      return out;
    }
    if (static_cast<int>(segs.size()) >= max_segments) return out;
    std::size_t worst = 0;
    double worst_score = -1.0;
    for (std::size_t k = 0; k < segs.size(); ++k) {
      double sc = 0.0;
      for (std::size_t i = 0; i < N; ++i) sc = std::max(sc, segs[k].error[i] / tol[i]);
      if (sc > worst_score) {
        worst_score = sc;
        worst = k;
      }
    }
    const Segment s = segs[worst];
    const double mid = 0.5 * (s.a + s.b);
    if (!(mid > s.a && mid < s.b)) return out;  // cannot split further
    segs[worst] = rule(s.a, mid);
    segs.push_back(rule(mid, s.b));
  }
}

template <std::size_t N, class F>
Result<N> integrate(F&& f, double a, double b, double rel_tol, double abs_tol, int max_segments = 4000) {
  std::array<double, N> abs;
  abs.fill(abs_tol);
  return integrate<N>(std::forward<F>(f), a, b, rel_tol, abs, max_segments);
}

template <class F>
double integrate_scalar(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0) {
  auto r = integrate<1>([&](double x) { return std::array<double, 1>{f(x)}; }, a, b, rel_tol, abs_tol);
  return r.value[0];
}

}  // namespace hadamard::quad
