#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "hadamard/errors.hpp"
#include "hadamard/grid.hpp"
#include "hadamard/quadrature.hpp"
#include "hadamard/rotsym.hpp"

using namespace hadamard;
using std::numbers::pi;

namespace {

double law_of_cosines(GeoPoint p, GeoPoint q) {
  const double c = std::cosh(p.r) * std::cosh(q.r) - std::sinh(p.r) * std::sinh(q.r) * std::cos(p.theta - q.theta);
  return std::acosh(std::max(1.0, c));
}

// hyperboloid model of H^3
using V4 = std::array<double, 4>;
double minkowski(const V4& a, const V4& b) { return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]; }

std::shared_ptr<const JacobiSolution> sinh_solution(double t_max) {
  return std::make_shared<JacobiSolution>(solve_jacobi(RadialFunction::constant(1.0), t_max, 1e-11));
}

}  // namespace

TEST_SUITE("quadrature") {
  TEST_CASE("GK nodes integrate polynomials and smooth functions") {
    auto r = quad::integrate<2>([](double x) { return std::array<double, 2>{x * x * x * x, std::exp(x)}; }, 0.0,
                                2.0, 1e-12, 0.0);
    CHECK(r.converged);
    CHECK(r.value[0] == doctest::Approx(32.0 / 5.0).epsilon(1e-13));
    CHECK(r.value[1] == doctest::Approx(std::exp(2.0) - 1.0).epsilon(1e-13));
    CHECK(quad::integrate_scalar([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-10) ==
          doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_SUITE("rotsym") {
  TEST_CASE("angles") {
    auto p = GeoPoint::make(1.0, -pi / 2);
    CHECK(p.theta == doctest::Approx(1.5 * pi));
    CHECK(angle_difference(0.1, 2 * pi - 0.1) == doctest::Approx(0.2));
    CHECK(angle_difference(pi, 0.0) == doctest::Approx(pi));
    CHECK_THROWS_AS(GeoPoint::make(-1.0, 0.0), DomainError);
  }

  TEST_CASE("surface primitives") {
    auto H = RotSymSurface::hyperbolic();
    CHECK(H.log_f(2.0) == doctest::Approx(std::log(std::sinh(2.0))).epsilon(1e-14));
    CHECK(H.log_f(800.0) == doctest::Approx(800.0 - std::log(2.0)).epsilon(1e-14));
    CHECK(H.log_f_increment(1.0, 1e-9) == doctest::Approx(1e-9 / std::tanh(1.0)).epsilon(1e-8));
    CHECK(H.w_at_log(0.0) == doctest::Approx(1.0 / std::tanh(1.0)));
    auto J = RotSymSurface::from_jacobi(sinh_solution(10.0));
    for (double r : {0.01, 0.5, 3.0, 9.0}) {
      CHECK(J.log_f(r) == doctest::Approx(H.log_f(r)).epsilon(1e-9));
      CHECK(J.log_f_increment(r, 1e-5) == doctest::Approx(H.log_f_increment(r, 1e-5)).epsilon(1e-8));
      CHECK(J.log_f_increment(r, 0.7) == doctest::Approx(H.log_f_increment(r, 0.7)).epsilon(1e-8));
    }
    CHECK(J.r_max() == doctest::Approx(10.0));
  }

  TEST_CASE("distance examples") {
    auto H = RotSymSurface::hyperbolic();
    const double d = distance(H, {1.0, 0.0}, {1.0, pi / 2});
    CHECK(d == doctest::Approx(std::acosh(std::cosh(1.0) * std::cosh(1.0))).epsilon(1e-10));
    CHECK(distance(H, {1.3, 0.4}, {1.3, 0.4}) == 0.0);
    auto E = RotSymSurface::euclidean();
    CHECK(distance(E, {1.0, 0.0}, {2.0, 0.0}) == doctest::Approx(1.0));
    CHECK(distance(E, {1.0, 0.0}, {1.0, pi / 2}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
    CHECK(distance(E, {1.0, 0.0}, {2.0, pi}) == doctest::Approx(3.0));
    CHECK(distance(E, {0.0, 0.0}, {2.0, 1.0}) == doctest::Approx(2.0));
  }

  TEST_CASE("law of cosines on 100 random pairs") {
    auto H = RotSymSurface::hyperbolic();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> R(0.0, 6.0), A(0.0, 2 * pi);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      GeoPoint p{R(rng), A(rng)}, q{R(rng), A(rng)};
      worst = std::max(worst, std::abs(distance(H, p, q) - law_of_cosines(p, q)));
    }
    CHECK(worst <= 1e-8);
  }

  TEST_CASE("near-antipodal and near-radial pairs") {
    auto H = RotSymSurface::hyperbolic();
    for (double dth : {1e-9, 1e-4, 0.5, 3.0, pi - 1e-3, pi - 1e-7}) {
      GeoPoint p{2.0, 0.0}, q{3.5, dth};
      CHECK(distance(H, p, q) == doctest::Approx(law_of_cosines(p, q)).epsilon(1e-8));
    }
  }

  TEST_CASE("gradient matches closed form and finite differences") {
    auto H = RotSymSurface::hyperbolic();
    auto E = RotSymSurface::euclidean();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> R(0.2, 4.0), A(0.0, 2 * pi);
    for (int i = 0; i < 20; ++i) {
      GeoPoint p{R(rng), A(rng)}, q{R(rng), A(rng)};
      for (const auto* S : {&H, &E}) {
        auto g = distance_with_gradient(*S, p, q);
        auto c = fast_distance(*S, p, q);
        CHECK(g.d == doctest::Approx(c.d).epsilon(1e-9));
        CHECK(g.dd_dr == doctest::Approx(c.dd_dr).epsilon(1e-7));
        CHECK(g.dd_dtheta == doctest::Approx(c.dd_dtheta).epsilon(1e-7));
        const double h = 1e-5;
        const double fd = (fast_distance(*S, {p.r + h, p.theta}, q).d - fast_distance(*S, {p.r - h, p.theta}, q).d) /
                          (2 * h);
        CHECK(c.dd_dr == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("metric axioms on sinh and flat models") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> R(0.0, 5.0), A(0.0, 2 * pi);
    for (auto S : {RotSymSurface::hyperbolic(), RotSymSurface::euclidean()}) {
      double sym = 0.0, tri = 0.0;
      for (int i = 0; i < 100; ++i) {
        GeoPoint a{R(rng), A(rng)}, b{R(rng), A(rng)}, c{R(rng), A(rng)};
        const double ab = distance(S, a, b), ba = distance(S, b, a);
        sym = std::max(sym, std::abs(ab - ba));
        tri = std::max(tri, ab - distance(S, a, c) - distance(S, c, b));
      }
      CHECK(sym <= 1e-8);
      CHECK(tri <= 1e-7);
    }
  }

  TEST_CASE("Jacobi-backed surface agrees with hyperbolic closed form") {
    auto J = RotSymSurface::from_jacobi(sinh_solution(8.0));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> R(0.0, 5.0), A(0.0, 2 * pi);
    for (int i = 0; i < 20; ++i) {
      GeoPoint p{R(rng), A(rng)}, q{R(rng), A(rng)};
      CHECK(distance(J, p, q) == doctest::Approx(law_of_cosines(p, q)).epsilon(1e-7));
    }
    CHECK_THROWS_AS(distance(J, {9.0, 0.0}, {1.0, 1.0}), DomainError);
  }

  TEST_CASE("hyperbolic curvature scaling") {
    auto H2 = RotSymSurface::hyperbolic(2.0);
    // rescaled law of cosines: kappa d is the unit-curvature distance of (kappa r1, kappa r2)
    GeoPoint p{0.7, 0.3}, q{1.1, 2.0};
    const double d = distance(H2, p, q);
    CHECK(2.0 * d == doctest::Approx(law_of_cosines({1.4, 0.3}, {2.2, 2.0})).epsilon(1e-9));
    CHECK(fast_distance(H2, p, q).d == doctest::Approx(d).epsilon(1e-9));
  }

  TEST_CASE("angular gradient bound") {
    auto H = RotSymSurface::hyperbolic();
    CHECK(angular_gradient_bound(H, {2.0, 0.0}) == doctest::Approx(1.0 / std::sinh(2.0)));
    CHECK(angular_gradient_bound(H, {2.0, 0.0}) == doctest::Approx(0.27573).epsilon(1e-4));
    CHECK(angular_gradient_bound(RotSymSurface::euclidean(), {2.0, 1.0}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(angular_gradient_bound(H, {0.0, 0.0}), DomainError);
    // |grad theta| = 1/f: d/dtheta of the distance to a far point is bounded by f(r)
    auto g = fast_distance(H, {2.0, 0.0}, {4.0, 1.0});
    CHECK(std::abs(g.dd_dtheta) * angular_gradient_bound(H, {2.0, 0.0}) <= 1.0 + 1e-12);
  }

  TEST_CASE("volumes") {
    auto H = RotSymSurface::hyperbolic(1.0, 3);
    auto E = RotSymSurface::euclidean(4);
    CHECK(unit_ball_volume(2) == doctest::Approx(pi));
    CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * pi / 3.0));
    CHECK(ball_volume(H, 2, 1.0) == doctest::Approx(2 * pi * (std::cosh(1.0) - 1)).epsilon(1e-10));
    CHECK(ball_volume(H, 3, 2.0) == doctest::Approx(pi * (std::sinh(4.0) - 4.0)).epsilon(1e-10));
    CHECK(ball_volume(E, 2, 1.0) == doctest::Approx(pi).epsilon(1e-12));
    for (int k = 2; k <= 4; ++k)
      for (double t : {0.1, 1.0, 7.0})
        CHECK(ball_volume(E, k, t) == doctest::Approx(unit_ball_volume(k) * std::pow(t, k)).epsilon(1e-8));
    for (double t : {0.01, 0.5, 3.0, 20.0, 200.0})
      CHECK(ball_volume(H, 2, t) == doctest::Approx(2 * pi * (std::cosh(t) - 1)).epsilon(1e-8));
    CHECK(log_ball_volume(H, 2, 900.0) == doctest::Approx(std::log(pi) + 900.0).epsilon(1e-12));
    CHECK(cone_mass(E, 1.0, 3, 2.0) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
    CHECK(cone_mass(H, 2 * pi, 2, 1.0) == doctest::Approx(2 * pi * (std::cosh(1.0) - 1)).epsilon(1e-10));
    CHECK(cone_mass(H, 2 * pi, 2, 3.0) == doctest::Approx(2 * pi * (std::cosh(3.0) - 1)).epsilon(1e-10));
    CHECK_THROWS_AS(ball_volume(H, 4, 1.0), DomainError);
    CHECK_THROWS_AS(cone_mass(H, 0.0, 2, 1.0), DomainError);
    auto J = RotSymSurface::from_jacobi(sinh_solution(5.0), 3);
    CHECK(ball_volume(J, 3, 4.0) == doctest::Approx(pi * (std::sinh(8.0) - 8.0)).epsilon(1e-8));
    CHECK_THROWS_AS(ball_volume(J, 2, 6.0), DomainError);
  }

  TEST_CASE("upper density bound for radial cones") {
    auto H = RotSymSurface::hyperbolic(1.0, 3);
    const double gamma = 1.7, ck = gamma / (3 * unit_ball_volume(3));
    for (double t : {0.5, 2.0, 6.0})
      CHECK(cone_mass(H, gamma, 3, t) <= ck * ball_volume(H, 3, t) * (1 + 1e-12));
  }

  TEST_CASE("mass ratio monotonicity") {
    auto H = RotSymSurface::hyperbolic(1.0, 3);
    auto grid = linear_grid(0.05, 8.0, 160);
    auto slice = mass_ratio_series(H, 2, grid, [](double t) { return 2 * pi * (std::cosh(t) - 1); });
    auto rep = monotonicity_check(slice);
    CHECK(rep.pass);
    CHECK(rep.max_violation <= 1e-8);
    CHECK(slice.ratio.back() == doctest::Approx(1.0).epsilon(1e-9));

    const double gamma = 2.3;
    auto cone = mass_ratio_series(H, 3, grid, [&](double t) { return cone_mass(H, gamma, 3, t); });
    CHECK(monotonicity_check(cone).pass);
    for (double r : cone.ratio) CHECK(r == doctest::Approx(gamma / (3 * unit_ball_volume(3))).epsilon(1e-12));

    auto bad = MassRatioSeries::make({1.0, 2.0}, {1.0, 1.0}, {1.0, 2.0});
    CHECK_FALSE(monotonicity_check(bad).pass);
    CHECK(monotonicity_check(bad).max_violation == doctest::Approx(0.5));
    CHECK_THROWS_AS(MassRatioSeries::make({1.0, 2.0}, {1.0}, {1.0, 2.0}), DomainError);
  }

  TEST_CASE("cone inequality") {
    auto H = RotSymSurface::hyperbolic(1.0, 3);
    auto grid = linear_grid(0.2, 6.0, 30);
    auto radial = cone_inequality_check(H, 3, grid, [&](double t) { return cone_mass(H, 0.9, 3, t); });
    CHECK(radial.equality);
    CHECK(radial.max_rel_gap <= 1e-6);

    auto E = RotSymSurface::euclidean(3);
    auto plane = cone_inequality_check(E, 2, grid, [](double t) { return pi * t * t; });
    CHECK(plane.equality);

    // the geodesic disk through o is itself a radial cone: equality, not strict
    auto disk = cone_inequality_check(H, 2, grid, [](double t) { return 2 * pi * (std::cosh(t) - 1); });
    CHECK(disk.equality);

    // a geodesic plane at distance delta from o: strict inequality
    const double delta = 0.8;
    auto off = [&](double t) {
      return t <= delta ? 0.0 : 2 * pi * (std::cosh(t) / std::cosh(delta) - 1);
    };
    auto strict_grid = linear_grid(1.0, 6.0, 20);
    auto displaced = cone_inequality_check(H, 2, strict_grid, off);
    CHECK(displaced.holds);
    CHECK_FALSE(displaced.equality);
    CHECK(displaced.max_excess < 0.0);

    CHECK_THROWS_AS(cone_inequality_check(H, 2, std::vector<double>{0.0}, off), DegenerateProfile);
  }

  TEST_CASE("displaced cone by mesh quadrature (reported)") {
    // Geodesic cone in H^3 with apex at distance delta from o, half-angle phi, axis
    // orthogonal to the segment from o. Area inside B(o,t) by a midpoint mesh.
    const double delta = 1.0, phi = 0.6;
    const V4 o{1, 0, 0, 0}, v{std::cosh(delta), std::sinh(delta), 0, 0};
    const V4 a{std::sinh(delta), std::cosh(delta), 0, 0}, b{0, 0, 1, 0}, c{0, 0, 0, 1};
    auto mesh_mass = [&](double t) {
      const int nr = 400, np = 120;
      const double rho_max = t + delta, dr = rho_max / nr, dp = 2 * pi / np;
      double sum = 0.0;
      for (int j = 0; j < np; ++j) {
        const double psi = (j + 0.5) * dp;
        V4 e;
        for (int i = 0; i < 4; ++i)
          e[i] = std::cos(phi) * b[i] + std::sin(phi) * (std::cos(psi) * a[i] + std::sin(psi) * c[i]);
        for (int i = 0; i < nr; ++i) {
          const double rho = (i + 0.5) * dr;
          V4 x;
          for (int m = 0; m < 4; ++m) x[m] = std::cosh(rho) * v[m] + std::sinh(rho) * e[m];
          if (std::acosh(std::max(1.0, -minkowski(o, x))) <= t) sum += std::sinh(rho) * std::sin(phi) * dr * dp;
        }
      }
      return sum;
    };
    // semi-analytic: cosh d = cosh rho cosh delta + sinh rho sin(phi) cos(psi) sinh delta
    auto exact_mass = [&](double t) {
      return quad::integrate_scalar(
          [&](double psi) {
            const double A = std::cosh(delta), B = std::sin(phi) * std::cos(psi) * std::sinh(delta),
                         C = std::cosh(t);
            // A cosh r + B sinh r = C  ->  (A+B) y^2 - 2C y + (A-B) = 0, y = e^r
            const double disc = C * C - (A * A - B * B);
            if (disc < 0) return 0.0;
            const double y = (C + std::sqrt(disc)) / (A + B);
            const double r = std::max(0.0, std::log(y));
            return std::sin(phi) * (std::cosh(r) - 1.0);
          },
          0.0, 2 * pi, 1e-10);
    };
    auto H = RotSymSurface::hyperbolic(1.0, 3);
    for (double t : {1.5, 3.0}) CHECK(mesh_mass(t) == doctest::Approx(exact_mass(t)).epsilon(2e-2));
    auto grid = linear_grid(1.1, 5.0, 40);
    auto series = mass_ratio_series(H, 2, grid, exact_mass);
    auto rep = monotonicity_check(series);
    MESSAGE("displaced cone mass-ratio monotonicity: max violation " << rep.max_violation
                                                                     << (rep.pass ? " (pass)" : " (fail)"));
    CHECK(std::isfinite(rep.max_violation));
  }
}
