#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "hadamard/angular.hpp"
#include "hadamard/errors.hpp"
#include "hadamard/grid.hpp"
#include "hadamard/quadrature.hpp"

using namespace hadamard;
using std::numbers::pi;

namespace {

AngularExtension hyperbolic_field(double L = 3.0, double tol = 1e-4) {
  return AngularExtension(RotSymSurface::hyperbolic(), RadialFunction::constant(1.0), ConeSpec(L, 0.0), tol);
}

}  // namespace

TEST_SUITE("angular") {
  TEST_CASE("kernel shape") {
    using K = MollifierKernel;
    CHECK(K::chi(0.0) == 1.0);
    CHECK(K::chi(-1.0) == 1.0);
    CHECK(K::chi(2.0) == 0.0);
    CHECK(K::chi(-2.5) == 0.0);
    CHECK(K::chi(1.5) == doctest::Approx(0.5));
    double max_d1 = 0.0, max_d2 = 0.0;
    for (double s = -2.2; s <= 2.2; s += 1e-3) {
      const double v = K::chi(s);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      const double h = 1e-5;
      const double fd = (K::chi(s + h) - K::chi(s - h)) / (2 * h);
      CHECK(K::chi_prime(s) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
      const double d2 = (K::chi_prime(s + h) - K::chi_prime(s - h)) / (2 * h);
      max_d1 = std::max(max_d1, std::abs(K::chi_prime(s)));
      max_d2 = std::max(max_d2, std::abs(d2));
    }
    CHECK(max_d1 < 5.0);
    CHECK(max_d2 < 50.0);
    CHECK(std::isfinite(K::chi_prime(1.0 + 1e-15)));
  }

  TEST_CASE("tilde_h formula") {
    ConeSpec cone(3.0, 0.5);
    CHECK(tilde_h(cone, {0.0, 0.0}) == 1.0);
    CHECK(tilde_h(cone, {2.0, 0.5}) == 0.0);
    CHECK(tilde_h(cone, {1.0, 0.5 + 2.0 / 3.0}) == 1.0);
    CHECK(tilde_h(cone, {3.0, 0.5 - 0.1}) == doctest::Approx(0.3));
    CHECK(tilde_h(cone, {0.6, 0.5}) == doctest::Approx(0.8));
  }

  TEST_CASE("support box") {
    auto S = RotSymSurface::hyperbolic();
    auto box = support_box(S, RadialFunction::constant(1.0), {5.0, 1.0});
    CHECK(box.support == doctest::Approx(2.0));
    CHECK(box.r_lo == doctest::Approx(3.0));
    CHECK(box.half_width == doctest::Approx(2.0 / std::sinh(3.0)));
    CHECK(support_box(S, RadialFunction::constant(1.0), {1.0, 1.0}).half_width == doctest::Approx(pi));
    // decreasing scale widens the support until it settles
    auto b = RadialFunction::analytic({.value = [](double t) { return 1.0 / (1.0 + 0.1 * t); },
                                       .monotonicity = Monotonicity::decreasing});
    auto wide = support_box(S, b, {10.0, 0.0});
    CHECK(wide.support > 2.0 * (1.0 + 0.1 * 10.0));
    CHECK(wide.support == doctest::Approx(2.0 * (1.0 + 0.1 * wide.r_hi)).epsilon(1e-9));
  }

  TEST_CASE("R(1) against a geodesic-polar oracle") {
    // b = 1 on H^2: R(1) = 2 pi int_0^2 chi(s) sinh(s) ds at every point
    const double oracle =
        2 * pi * quad::integrate_scalar([](double s) { return MollifierKernel::chi(s) * std::sinh(s); }, 0.0, 2.0,
                                        1e-12);
    auto A = hyperbolic_field();
    const ScalarField one = [](GeoPoint) { return 1.0; };
    for (GeoPoint p : {GeoPoint{0.0, 0.0}, GeoPoint{1.0, 2.0}, GeoPoint{6.0, 0.3}})
      CHECK(A.R(p, one) == doctest::Approx(oracle).epsilon(1e-6));
  }

  TEST_CASE("normalization, range and linearity") {
    auto A = hyperbolic_field();
    const ScalarField one = [](GeoPoint) { return 1.0; };
    const ScalarField th = [&](GeoPoint p) { return tilde_h(A.cone(), p); };
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> R(0.0, 8.0), T(-1.0, 1.0);
    for (int i = 0; i < 8; ++i) {
      GeoPoint p{R(rng), T(rng)};
      CHECK(A.mollify(p, one) == doctest::Approx(1.0).epsilon(1e-4));
      const double h = A.mollify(p, th);
      CHECK(h >= -1e-12);
      CHECK(h <= 1.0 + 1e-12);
      const double lin = A.mollify(p, [&](GeoPoint y) { return 0.7 * th(y) - 0.4; });
      CHECK(lin == doctest::Approx(0.7 * h - 0.4).epsilon(2e-4));
    }
  }

  TEST_CASE("locality") {
    auto A = hyperbolic_field();
    GeoPoint p{4.0, 0.2};
    const ScalarField th = [&](GeoPoint y) { return tilde_h(A.cone(), y); };
    const ScalarField changed = [&](GeoPoint y) {
      return fast_distance(A.surface(), p, y).d > 2.0 + 1e-9 ? 0.123 : th(y);
    };
    CHECK(A.mollify(p, changed) == doctest::Approx(A.mollify(p, th)).epsilon(1e-9));
  }

  TEST_CASE("computed radius and h = 1 outside the double cone") {
    auto A = hyperbolic_field();
    const double R1 = A.computed_radius();
    CHECK(R1 == doctest::Approx(2.0 + std::asinh(6.0)).epsilon(1e-6));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> R(R1, R1 + 6.0), T(2.0 / 3.0, 2 * pi - 2.0 / 3.0);
    for (int i = 0; i < 50; ++i) CHECK(A.value({R(rng), T(rng)}) == doctest::Approx(1.0).epsilon(1e-4));
    // inside the cone it is not 1
    CHECK(A.value({R1 + 1.0, 0.0}) < 0.5);
  }

  TEST_CASE("continuity at infinity along a ray where tilde_h is locally 1") {
    auto A = hyperbolic_field();
    for (double r : {6.0, 9.0, 12.0}) CHECK(std::abs(A.value({r, 1.2 / 3.0 + 0.2}) - 1.0) <= 1e-4);
  }

  TEST_CASE("gradient against finite differences of h") {
    auto A = hyperbolic_field(3.0, 1e-6);
    GeoPoint p{2.5, 0.15};
    auto j = A.jet(p, false);
    const double hr = 1e-4, ht = 1e-4;
    const double fr = (A.value({p.r + hr, p.theta}) - A.value({p.r - hr, p.theta})) / (2 * hr);
    const double ft = (A.value({p.r, p.theta + ht}) - A.value({p.r, p.theta - ht})) / (2 * ht);
    CHECK(j.dr == doctest::Approx(fr).epsilon(1e-4).scale(1e-3));
    CHECK(j.dtheta == doctest::Approx(ft).epsilon(1e-4).scale(1e-3));
    CHECK(j.dtheta > 0.0);
  }

  TEST_CASE("constant field has zero derivatives") {
    AngularExtension A(RotSymSurface::hyperbolic(), RadialFunction::constant(1.0), ConeSpec(3.0, 0.0), 1e-4,
                       [](GeoPoint) { return 1.0; });
    auto j = A.jet({5.0, 0.1}, true);
    CHECK(j.h == doctest::Approx(1.0));
    CHECK(j.grad_norm == 0.0);
    CHECK(*j.hess_norm == 0.0);
    auto sol = solve_jacobi(RadialFunction::constant(1.0), 20.0, 1e-10);
    std::vector<double> grid{5.0, 6.0, 7.0};
    std::vector<double> rays{0.0, 0.3};
    auto rep = decay_check(A, sol, 0.75, 1.0, DecayVariant::general, grid, rays);
    CHECK(rep.sup_grad == 0.0);
    CHECK(rep.pass);
  }

  TEST_CASE("decay on the hyperbolic plane") {
    const auto t0 = std::chrono::steady_clock::now();
    auto A = hyperbolic_field();
    const double R1 = A.computed_radius();
    auto sol = solve_jacobi(RadialFunction::constant(1.0), 30.0, 1e-10);
    auto grid = linear_grid(R1, R1 + 5.0, 11);
    std::vector<double> rays{0.0, 0.1, 0.25, 0.45, 0.7};
    auto rep = decay_check(A, sol, 0.75, 1.0, DecayVariant::general, grid, rays);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    MESSAGE("c4 grad sup " << rep.sup_grad << " slope " << rep.slope_grad << "; hess sup " << rep.sup_hess
                           << " slope " << rep.slope_hess << "; " << secs << " s");
    CHECK(rep.pass);
    CHECK(rep.slope_grad <= 0.05);
    CHECK(rep.slope_hess <= 0.05);
    CHECK(secs < 60.0);
    for (const auto& s : rep.samples) {
      CHECK(s.h >= -1e-12);
      CHECK(s.h <= 1.0 + 1e-12);
    }
    CHECK_THROWS_AS(decay_check(A, sol, 0.75, 1.0, DecayVariant::general, grid, std::vector<double>{1.5}),
                    DomainError);
    std::vector<double> early{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(decay_check(A, sol, 0.75, 1.0, DecayVariant::general, early, rays), DomainError);
  }

  TEST_CASE("b roughly constant on kernel supports (log-pinched profile)") {
    auto prof = catalog_lookup("log-pinched", {{"eps", 1.0}, {"eps_tilde", 0.5}, {"r_star", 10.0}, {"core_k", 1.0}});
    auto sol = std::make_shared<JacobiSolution>(solve_jacobi(prof.a, 5000.0, 1e-10));
    auto S = RotSymSurface::from_jacobi(sol);
    auto rep = vah_apu_check(S, prof.b, 200, 1.0, 30.0, 7);
    MESSAGE("fitted c = " << rep.c << " (ratios in [" << rep.min_ratio << ", " << rep.max_ratio << "])");
    CHECK(rep.pairs == 200);
    CHECK(rep.c >= 1.0);
    CHECK(rep.min_ratio >= 1.0 / rep.c);
    CHECK(rep.max_ratio <= rep.c);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(AngularExtension(RotSymSurface::hyperbolic(1.0, 3), RadialFunction::constant(1.0),
                                     ConeSpec(3.0, 0.0)),
                    DomainError);
    auto sol = std::make_shared<JacobiSolution>(solve_jacobi(RadialFunction::constant(1.0), 5.0, 1e-10));
    AngularExtension A(RotSymSurface::from_jacobi(sol), RadialFunction::constant(1.0), ConeSpec(3.0, 0.0));
    CHECK_THROWS_AS(A.value({4.0, 0.0}), DomainError);
  }
}
