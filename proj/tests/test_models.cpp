#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hadamard/errors.hpp"
#include "hadamard/grid.hpp"
#include "hadamard/models.hpp"

using namespace hadamard;
using nlohmann::json;

namespace {

// Central difference against the declared derivative, relative 1e-4.
void check_derivative(const RadialFunction& f, double lo, double hi) {
  REQUIRE(f.has_derivative());
  for (double t : linear_grid(lo, hi, 97)) {
    const double h = 1e-5 * std::max(1.0, t);
    if (t - h < 0.0 || t + h > f.t_max()) continue;
    bool near_break = false;
    for (double b : f.breakpoints()) near_break |= std::abs(t - b) < 2 * h;
    if (near_break) continue;
    const double fd = (f(t + h) - f(t - h)) / (2 * h);
    const double d = *f.derivative(t);
    CHECK(std::abs(fd - d) <= 1e-4 * std::max(std::abs(d), 1e-3 * std::abs(f(t))) + 1e-12);
  }
}

DataC log_pinched_data(double c1, double r_star) {
  auto prof = catalog_lookup("log-pinched", {{"eps", 1.0}, {"eps_tilde", 0.5}, {"r_star", r_star}});
  return DataC(prof, std::exp(2.0), 1.0, 0.5, c1, 2);
}

}  // namespace

TEST_SUITE("catalog") {
  TEST_CASE("constant model") {
    auto p = catalog_lookup("constant", {{"k", 1.0}});
    for (double t : {0.0, 0.5, 3.0, 100.0}) {
      CHECK(p.a(t) == 1.0);
      CHECK(p.b(t) == 1.0);
    }
  }

  TEST_CASE("euclidean model") {
    auto p = catalog_lookup("euclidean");
    CHECK(p.a(2.0) == 0.0);
    CHECK(p.b(7.0) == 0.0);
  }

  TEST_CASE("log-pinched closed forms beyond r_star") {
    auto p = catalog_lookup("log-pinched", {{"eps", 1.0}, {"eps_tilde", 0.5}, {"r_star", 10.0}});
    for (double t : {10.0, 30.0, 1e3, 1e5}) {
      const double l = std::log(t);
      CHECK(p.a(t) * p.a(t) == doctest::Approx(2.0 / (t * t * l)).epsilon(1e-14));
      CHECK(p.b(t) * p.b(t) == doctest::Approx(l / (t * t)).epsilon(1e-14));
      CHECK(p.a.log_value_log_arg(l) == doctest::Approx(std::log(p.a(t))).epsilon(1e-13));
      CHECK(p.b.log_value_log_arg(l) == doctest::Approx(std::log(p.b(t))).epsilon(1e-13));
    }
    CHECK(p.r_star == 10.0);
    check_derivative(p.a, 10.0, 200.0);
    check_derivative(p.b, 10.0, 200.0);
  }

  TEST_CASE("log-pinched constraints are named") {
    CHECK_THROWS_WITH_AS(catalog_lookup("log-pinched", {{"eps", 0.5}, {"eps_tilde", 0.5}, {"r_star", 10.0}}),
                         doctest::Contains("eps > eps_tilde"), ConstraintViolation);
    CHECK_THROWS_AS(catalog_lookup("log-pinched", {{"eps", 1.0}, {"eps_tilde", 0.5}, {"r_star", 3.0}}),
                    ConstraintViolation);
    CHECK_THROWS_AS(catalog_lookup("nope"), ConstraintViolation);
  }

  TEST_CASE("superexp and sinh-iterate agree on the curvature root") {
    auto s = catalog_lookup("superexp", {{"c", 1.0}, {"eps", 0.1}});
    auto it = catalog_lookup("sinh-iterate", {{"m", 2}});
    for (double t : {0.0, 0.3, 1.0, 2.0, 3.0}) {
      const double x = std::sinh(t);
      const double xc = t == 0.0 ? 1.0 : x / std::tanh(x);
      const double a2 = xc + std::cosh(t) * std::cosh(t);
      CHECK(s.a(t) * s.a(t) == doctest::Approx(a2).epsilon(1e-12));
      CHECK(it.a(t) * it.a(t) == doctest::Approx(a2).epsilon(1e-12));
    }
    CHECK(s.a(0.0) == doctest::Approx(std::sqrt(2.0)));
    check_derivative(s.a, 0.01, 20.0);
    check_derivative(s.b, 0.0, 20.0);
    check_derivative(it.a, 0.01, 5.0);
    CHECK(s.a.log_value(130.0) == doctest::Approx(130.0 - std::log(2.0)).epsilon(1e-12));
  }

  TEST_CASE("b dominates a on every catalog entry") {
    std::vector<CurvatureProfile> all = {
        catalog_lookup("constant", {{"k", 2.0}}),
        catalog_lookup("euclidean"),
        catalog_lookup("log-pinched", {{"eps", 1.0}, {"eps_tilde", 0.5}, {"r_star", 10.0}}),
        catalog_lookup("log-pinched", {{"eps", 1.0}, {"eps_tilde", 0.5}, {"r_star", 10.0}, {"core_k", 1.0}}),
        catalog_lookup("superexp", {{"c", 1.0}, {"eps", 0.1}}),
        catalog_lookup("sinh-iterate", {{"m", 3}, {"b_scale", 1.5}}),
    };
    for (const auto& p : all) {
      const double hi = std::min(100.0, p.a.t_max() - 2.0);
      CHECK(p.ordering_violation(linear_grid(std::max(p.r_star, 0.0), hi, 500)) <= 0.0);
    }
  }

  TEST_CASE("sampled profiles interpolate monotonically and refuse to extrapolate") {
    std::vector<double> t, a, b;
    for (int i = 0; i <= 20; ++i) {
      t.push_back(i * 0.5);
      a.push_back(1.0 + 0.1 * i);
      b.push_back(1.0 + 0.2 * i);
    }
    json g = {{"grid", {{"t", t}, {"a", a}, {"b", b}, {"a_monotonicity", "increasing"}}}};
    auto p = profile_from_json(g);
    CHECK(p.a(0.25) == doctest::Approx(1.05));
    CHECK(p.a.monotonicity() == Monotonicity::increasing);
    CHECK(p.b.monotonicity() == Monotonicity::none);
    CHECK_THROWS_AS(p.a(10.5), DomainError);
    CHECK(p.a.monotonicity_violation(linear_grid(0.0, 10.0, 1000)) == 0.0);
    auto again = profile_from_json(profile_to_json(p));
    CHECK(again.b(3.3) == p.b(3.3));
  }

  TEST_CASE("catalog JSON round trip") {
    json j = {{"model", "log-pinched"}, {"params", {{"eps", 1.0}, {"eps_tilde", 0.5}}}, {"r_star", 10.0}};
    auto p = profile_from_json(j);
    auto q = profile_from_json(profile_to_json(p));
    CHECK(q.r_star == 10.0);
    CHECK(q.a(42.0) == p.a(42.0));
  }
}

TEST_SUITE("c-conditions") {
  TEST_CASE("log-pinched passes all four on [e^2, 1e3]") {
    auto data = log_pinched_data(2.0, 4.2);
    auto rep = check_c_conditions(data, geometric_grid(std::exp(2.0), 1e3));
    for (const auto& c : rep.conditions) {
      INFO(c.name);
      CHECK(c.pass);
      CHECK(c.inf_slack >= -1e-12);
    }
  }

  TEST_CASE("euclidean fails C1 at every point") {
    DataC data(catalog_lookup("euclidean"), 3.0, 1.0, 0.5, 1.0, 2);
    auto rep = check_c_conditions(data, geometric_grid(3.0, 100.0));
    CHECK_FALSE(rep.conditions[0].pass);
    CHECK(*rep.conditions[0].first_violation == 3.0);
  }

  TEST_CASE("constant curvature passes C1") {
    DataC data(catalog_lookup("constant", {{"k", 1.0}}), 3.0, 1.0, 0.5, 1.0, 2);
    auto rep = check_c_conditions(data, geometric_grid(3.0, 1e4));
    CHECK(rep.conditions[0].pass);
  }

  TEST_CASE("decreasing b with C1 = 1 passes C3") {
    auto data = log_pinched_data(1.0, 10.0);
    auto rep = check_c_conditions(data, geometric_grid(std::exp(2.0), 1e4));
    CHECK(rep.conditions[2].pass);
  }

  TEST_CASE("enlarging C1 never breaks a pass") {
    const auto grid = geometric_grid(std::exp(2.0), 1e3);
    for (double r_star : {4.2, 6.0, 10.0}) {
      std::array<bool, 4> prev{};
      for (double c1 : {1.0, 1.2, 1.5, 2.0, 4.0}) {
        auto rep = check_c_conditions(log_pinched_data(c1, r_star), grid);
        for (int i = 0; i < 4; ++i) {
          if (prev[i]) CHECK(rep.conditions[i].pass);
          prev[i] = rep.conditions[i].pass;
        }
      }
    }
  }

  TEST_CASE("bad inputs") {
    auto data = log_pinched_data(2.0, 10.0);
    CHECK_THROWS_AS(check_c_conditions(data, std::vector<double>{}), DomainError);
    CHECK_THROWS_AS(check_c_conditions(data, std::vector<double>{5.0}), DomainError);
    CHECK_THROWS_AS(DataC(data.profile, 10.0, 0.5, 0.5, 2.0, 2), ConstraintViolation);
    CHECK_THROWS_AS(ConeSpec(2.0, 0.0), ConstraintViolation);
  }
}
